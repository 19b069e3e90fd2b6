#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mht/special_fn.hpp"

namespace mht {

/// Coupled hierarchy d eps_i = -gamma_i (eps_i - eps_{i-1}) dt + kappa_i eps_i^s eps_{i-1}^{1-s} dW_i,
/// i = 1..N, with eps_0 held fixed. s = 1/2 gives gamma conditionals, s = 1 inverse-gamma ones;
/// beta_i = 2 gamma_i / kappa_i^2.
struct SdeParams {
    std::vector<double> gamma;
    std::vector<double> kappa;
    double s_exponent = 0.5;
    double eps0 = 1.0;
    double dt = 0.0;            // 0 selects 1e-3 / max gamma
    std::size_t steps = 0;      // recorded steps after burn-in
    std::size_t burn_in = 0;
    bool default_burn_in = true;  // 20 / min gamma worth of steps, overriding burn_in
    std::size_t record_stride = 1;
    std::vector<double> initial;  // empty: every level starts at eps0

    int levels() const noexcept { return static_cast<int>(gamma.size()); }
    std::vector<double> beta() const;
    double step() const;
    std::size_t burn_in_steps() const;
    void validate() const;

    /// gamma_i = gamma1 b^{i-1} and kappa_i = sqrt(2 gamma_i / beta_i).
    static SdeParams geometric(std::span<const double> beta, double gamma1, double s_exponent,
                               double eps0 = 1.0, double b = 10.0);
};

struct SdeTrajectory {
    std::vector<double> time;
    std::vector<std::vector<double>> levels;  // levels[i][k] = eps_{i+1}(time[k])
    std::size_t excursions = 0;               // reflections at the positivity floor
    double sample_dt = 0.0;                   // time between recorded samples
};

inline constexpr double kSdeFloor = 1e-12;
inline constexpr double kSdeBlowUp = 1e12;

/// Euler-Maruyama with reflection at kSdeFloor. Throws DivergenceError if any level exceeds
/// kSdeBlowUp or becomes non-finite.
SdeTrajectory simulate_hierarchy(const SdeParams& params, std::uint64_t seed);

/// KS distance between the trajectory's marginal, subsampled every 3/gamma time units, and the
/// stationary conditional with parent eps_prev. Needs at least 100 decorrelation spacings.
double stationary_check(std::span<const double> trajectory, double sample_dt, double gamma, double beta,
                        ModelClass model_class, double eps_prev);

}  // namespace mht
