#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include <json.hpp>

#include "mht/distributions.hpp"
#include "mht/matrix_ensembles.hpp"
#include "mht/pipeline.hpp"
#include "mht/sde.hpp"

namespace mht {

/// Shortest round-trip decimal form ("%.17g"), so outputs are byte-stable.
std::string format_double(double v);

void write_density_csv(std::ostream& out, const DensityCurve& curve);
nlohmann::json density_to_json(const DensityCurve& curve);

void write_cov_csv(std::ostream& out, const CovMatrix& m);
nlohmann::json cov_to_json(const CovMatrix& m);
CovMatrix cov_from_json(const nlohmann::json& j);

/// Columns t, eps1..epsN.
void write_trajectory_csv(std::ostream& out, const SdeTrajectory& traj);

/// Columns x, empirical, model: bin centres with empirical and model densities (mass / width).
void write_comparison_csv(std::ostream& out, const Histogram& h, std::span<const double> model_masses);

nlohmann::json report_to_json(const FitReport& report);
FitReport report_from_json(const nlohmann::json& j);
/// Human-readable table derived from the JSON report.
std::string format_report(const FitReport& report);

}  // namespace mht
