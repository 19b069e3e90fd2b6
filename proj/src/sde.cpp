#include "mht/sde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "mht/error.hpp"
#include "mht/stats.hpp"

namespace mht {

std::vector<double> SdeParams::beta() const {
    std::vector<double> out(gamma.size());
    for (std::size_t i = 0; i < gamma.size(); ++i)
        out[i] = kappa[i] > 0.0 ? 2.0 * gamma[i] / (kappa[i] * kappa[i]) : std::numeric_limits<double>::infinity();
    return out;
}

double SdeParams::step() const {
    if (dt > 0.0) return dt;
    return 1e-3 / *std::max_element(gamma.begin(), gamma.end());
}

std::size_t SdeParams::burn_in_steps() const {
    if (!default_burn_in) return burn_in;
    return static_cast<std::size_t>(std::ceil(20.0 / *std::min_element(gamma.begin(), gamma.end()) / step()));
}

void SdeParams::validate() const {
    if (gamma.empty()) throw ParameterError("SdeParams: at least one level is required");
    if (kappa.size() != gamma.size()) throw ParameterError("SdeParams: gamma and kappa lengths differ");
    for (double g : gamma)
        if (!(g > 0.0) || !std::isfinite(g)) throw ParameterError("SdeParams: gamma must be positive");
    for (double k : kappa)
        if (!(k >= 0.0) || !std::isfinite(k)) throw ParameterError("SdeParams: kappa must be non-negative");
    if (s_exponent != 0.5 && s_exponent != 1.0) throw ParameterError("SdeParams: s must be 1/2 or 1");
    if (!(eps0 > 0.0)) throw ParameterError("SdeParams: eps0 must be positive");
    if (dt < 0.0 || !std::isfinite(dt)) throw ParameterError("SdeParams: dt must be positive");
    if (!(step() * *std::max_element(gamma.begin(), gamma.end()) < 0.1))
        throw ParameterError("SdeParams: dt * max gamma must stay below 0.1");
    if (steps < 1) throw ParameterError("SdeParams: steps must be positive");
    if (record_stride < 1) throw ParameterError("SdeParams: record stride must be positive");
    if (!initial.empty()) {
        if (initial.size() != gamma.size()) throw ParameterError("SdeParams: initial state length mismatch");
        for (double v : initial)
            if (!(v > 0.0)) throw ParameterError("SdeParams: initial state must be positive");
    }
}

SdeParams SdeParams::geometric(std::span<const double> beta, double gamma1, double s_exponent, double eps0,
                               double b) {
    if (beta.empty()) throw ParameterError("SdeParams: at least one level is required");
    SdeParams p;
    p.s_exponent = s_exponent;
    p.eps0 = eps0;
    double g = gamma1;
    for (double bi : beta) {
        if (!(bi > 0.0)) throw ParameterError("SdeParams: beta must be positive");
        p.gamma.push_back(g);
        p.kappa.push_back(std::sqrt(2.0 * g / bi));
        g *= b;
    }
    return p;
}

SdeTrajectory simulate_hierarchy(const SdeParams& params, std::uint64_t seed) {
    params.validate();
    const std::size_t n = params.gamma.size();
    const double dt = params.step();
    const double sqrt_dt = std::sqrt(dt);
    const double s = params.s_exponent;
    const std::size_t burn = params.burn_in_steps();
    const std::size_t total = burn + params.steps;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> eps = params.initial.empty() ? std::vector<double>(n, params.eps0) : params.initial;
    std::vector<double> next(n);

    SdeTrajectory out;
    out.sample_dt = dt * static_cast<double>(params.record_stride);
    const std::size_t records = params.steps / params.record_stride + 1;
    out.time.reserve(records);
    out.levels.assign(n, {});
    for (auto& l : out.levels) l.reserve(records);

    auto record = [&](std::size_t k) {
        out.time.push_back(static_cast<double>(k - burn) * dt);
        for (std::size_t i = 0; i < n; ++i) out.levels[i].push_back(eps[i]);
    };

    if (burn == 0) record(0);
    for (std::size_t k = 1; k <= total; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            const double parent = i == 0 ? params.eps0 : eps[i - 1];
            const double diffusion = s == 0.5 ? std::sqrt(eps[i] * parent) : eps[i];
            double v = eps[i] - params.gamma[i] * (eps[i] - parent) * dt +
                       params.kappa[i] * diffusion * sqrt_dt * normal(rng);
            if (v < kSdeFloor) {
                v = 2.0 * kSdeFloor - v;
                ++out.excursions;
            }
            if (!(v <= kSdeBlowUp))
                throw DivergenceError("simulate_hierarchy: level " + std::to_string(i + 1) + " diverged",
                                      static_cast<int>(i + 1));
            next[i] = v;
        }
        eps.swap(next);
        if (k >= burn && (k - burn) % params.record_stride == 0) record(k);
    }
    return out;
}

double stationary_check(std::span<const double> trajectory, double sample_dt, double gamma, double beta,
                        ModelClass model_class, double eps_prev) {
    if (!(sample_dt > 0.0) || !(gamma > 0.0) || !(beta > 0.0) || !(eps_prev > 0.0))
        throw ParameterError("stationary_check: parameters must be positive");
    const auto spacing = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(3.0 / (gamma * sample_dt))));
    std::vector<double> sub;
    for (std::size_t k = 0; k < trajectory.size(); k += spacing) sub.push_back(trajectory[k]);
    if (sub.size() < 100)
        throw DataError("stationary_check: trajectory shorter than 100 decorrelation times");
    if (model_class == ModelClass::Wishart)
        return ks_statistic(sub, [&](double x) { return gamma_cdf(x, beta, eps_prev / beta); });
    return ks_statistic(sub, [&](double x) { return inverse_gamma_cdf(x, beta + 1.0, beta * eps_prev); });
}

}  // namespace mht
