#include "mht/matrix_ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "mht/error.hpp"
#include "mht/quadrature.hpp"

namespace mht {
namespace {

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
    return 0.5 * (m + m.transpose());
}

// Lower-triangular Bartlett factor: A_ii^2 ~ chi^2(nu - i), A_ij ~ N(0, 1) below the diagonal.
Eigen::MatrixXd bartlett_factor(int p, double nu, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
    for (int i = 0; i < p; ++i) {
        std::gamma_distribution<double> g(0.5 * (nu - i), 1.0);
        a(i, i) = std::sqrt(2.0 * g(rng));
        for (int j = 0; j < i; ++j) a(i, j) = normal(rng);
    }
    return a;
}

void check_beta(double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ParameterError("beta must be positive and finite");
}

}  // namespace

CovMatrix::CovMatrix(const Eigen::MatrixXd& m) {
    if (m.rows() == 0 || m.rows() != m.cols()) throw ParameterError("CovMatrix: matrix must be square and non-empty");
    if (!m.allFinite()) throw DomainError("CovMatrix: non-finite entries");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw DomainError("CovMatrix: matrix is not symmetric");
    m_ = symmetrized(m);
    Eigen::LLT<Eigen::MatrixXd> llt(m_);
    if (llt.info() != Eigen::Success) throw DomainError("CovMatrix: matrix is not positive definite");
    chol_ = llt.matrixL();
    if ((chol_.diagonal().array() <= 0.0).any()) throw DomainError("CovMatrix: matrix is not positive definite");
}

CovMatrix CovMatrix::identity(int p, double scale) {
    if (p < 1) throw ParameterError("CovMatrix: dimension must be positive");
    return CovMatrix(scale * Eigen::MatrixXd::Identity(p, p));
}

void ChainSpec::validate() const {
    if (beta.empty()) throw ParameterError("ChainSpec: at least one level is required");
    for (double b : beta) check_beta(b);
    if (model_class == ModelClass::Wishart) {
        const double p = sigma0.dim();
        for (double b : beta)
            if (2.0 * b <= p - 1.0) throw ParameterError("ChainSpec: Wishart step requires 2 beta > p - 1");
    }
}

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetrized(a));
    if (eig.info() != Eigen::Success) throw DomainError("symmetric_sqrt: eigendecomposition failed");
    if ((eig.eigenvalues().array() <= 0.0).any()) throw DomainError("symmetric_sqrt: matrix is not positive definite");
    const Eigen::MatrixXd& v = eig.eigenvectors();
    return symmetrized(v * eig.eigenvalues().cwiseSqrt().asDiagonal() * v.transpose());
}

Eigen::MatrixXd sample_wishart(const CovMatrix& scale, double nu, std::mt19937_64& rng) {
    const int p = scale.dim();
    if (!(nu > p - 1)) throw ParameterError("sample_wishart: requires nu > p - 1");
    const Eigen::MatrixXd la = scale.cholesky() * bartlett_factor(p, nu, rng);
    return symmetrized(la * la.transpose());
}

CovMatrix sample_wishart_step(const CovMatrix& prev, double beta, std::mt19937_64& rng) {
    check_beta(beta);
    const int p = prev.dim();
    if (2.0 * beta <= p - 1.0) throw ParameterError("sample_wishart_step: requires 2 beta > p - 1");
    const Eigen::MatrixXd la = prev.cholesky() * bartlett_factor(p, 2.0 * beta, rng);
    return CovMatrix(symmetrized(la * la.transpose() / (2.0 * beta)));
}

CovMatrix sample_wishart_step(const CovMatrix& prev, double beta, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return sample_wishart_step(prev, beta, rng);
}

CovMatrix sample_inv_wishart_step(const CovMatrix& prev, double beta, std::mt19937_64& rng) {
    check_beta(beta);
    const int p = prev.dim();
    // Psi = 2 beta prev = K K^T. With W = K^{-T} A A^T K^{-1} ~ W_p(nu, Psi^{-1}),
    // the draw is W^{-1} = (K A^{-T}) (K A^{-T})^T.
    const double nu = 2.0 * beta + p + 1.0;
    const Eigen::MatrixXd a = bartlett_factor(p, nu, rng);
    const Eigen::MatrixXd a_inv_t =
        a.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(p, p)).transpose();
    const Eigen::MatrixXd m = std::sqrt(2.0 * beta) * prev.cholesky() * a_inv_t;
    return CovMatrix(symmetrized(m * m.transpose()));
}

CovMatrix sample_inv_wishart_step(const CovMatrix& prev, double beta, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return sample_inv_wishart_step(prev, beta, rng);
}

CovMatrix sample_chain(const ChainSpec& spec, std::mt19937_64& rng) {
    spec.validate();
    CovMatrix sigma = spec.sigma0;
    for (double b : spec.beta) {
        sigma = spec.model_class == ModelClass::Wishart ? sample_wishart_step(sigma, b, rng)
                                                        : sample_inv_wishart_step(sigma, b, rng);
    }
    return sigma;
}

CovMatrix sample_chain(const ChainSpec& spec, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return sample_chain(spec, rng);
}

Eigen::MatrixXd sample_returns(const CovMatrix& sigma, std::size_t count, std::mt19937_64& rng) {
    const int p = sigma.dim();
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd z(p, static_cast<Eigen::Index>(count));
    for (Eigen::Index k = 0; k < z.cols(); ++k)
        for (int i = 0; i < p; ++i) z(i, k) = normal(rng);
    return sigma.cholesky() * z;
}

Eigen::MatrixXd sample_returns(const CovMatrix& sigma, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return sample_returns(sigma, count, rng);
}

IdentityCheck rank1_det_identity(const CovMatrix& a, const Eigen::VectorXd& r) {
    const int p = a.dim();
    if (r.size() != p) throw ParameterError("rank1_det_identity: dimension mismatch");
    const Eigen::VectorXd y = symmetric_sqrt(a.matrix()) * r;
    const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(p, p) + y * y.transpose();
    return {m.determinant(), 1.0 + r.dot(a.matrix() * r)};
}

CftCheck verify_gamma_cft(int p, double nu, const CovMatrix& a, const Eigen::VectorXd& r, std::size_t samples,
                          std::uint64_t seed) {
    if (p < 1 || a.dim() != p || r.size() != p) throw ParameterError("verify_gamma_cft: dimension mismatch");
    if (!(nu > 0.5 * (p + 1))) throw ParameterError("verify_gamma_cft: requires nu > (p + 1)/2");
    if (samples < 2) throw ParameterError("verify_gamma_cft: at least two samples are required");
    const Eigen::VectorXd y = symmetric_sqrt(a.matrix()) * r;
    const double y2 = y.squaredNorm();

    CftCheck out;
    out.scalar_side = std::pow(1.0 + r.dot(a.matrix() * r), -nu);
    if (p == 1) {
        // X ~ Gamma(nu, 1): integrate exp(-y^2 X) against its density.
        const double lg = boost::math::lgamma(nu);
        auto f = [&](double x) {
            return x <= 0.0 ? 0.0 : std::exp((nu - 1.0) * std::log(x) - x * (1.0 + y2) - lg);
        };
        const QuadResult q = integrate(f, 0.0, std::numeric_limits<double>::infinity(), 1e-13);
        out.matrix_side = q.value;
        out.matrix_error = q.error;
        return out;
    }

    std::mt19937_64 rng(seed);
    const CovMatrix half = CovMatrix::identity(p, 0.5);
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
        const Eigen::MatrixXd x = sample_wishart(half, 2.0 * nu, rng);
        const double v = std::exp(-y.dot(x * y));
        const double delta = v - mean;
        mean += delta / static_cast<double>(k + 1);
        m2 += delta * (v - mean);
    }
    out.matrix_side = mean;
    out.matrix_error = std::sqrt(m2 / static_cast<double>(samples - 1) / static_cast<double>(samples));
    return out;
}

namespace {

// Wishart step on a factor F (Sigma = F F^T, possibly singular): the new factor is
// F A / sqrt(nu) with A A^T ~ W_k(nu, 1_k). For nu <= k - 1 this is the singular Wishart
// with integer nu, realized by a k x nu Gaussian matrix.
Eigen::MatrixXd wishart_factor_step(const Eigen::MatrixXd& f, double beta, std::mt19937_64& rng) {
    const auto k = static_cast<int>(f.cols());
    const double nu = 2.0 * beta;
    if (nu > k - 1) return f * bartlett_factor(k, nu, rng) / std::sqrt(nu);
    if (nu != std::floor(nu))
        throw ParameterError("simulate_market: 2 beta below p - 1 must be an integer (singular Wishart)");
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd g(k, static_cast<int>(nu));
    for (Eigen::Index j = 0; j < g.cols(); ++j)
        for (int i = 0; i < k; ++i) g(i, j) = normal(rng);
    return f * g / std::sqrt(nu);
}

}  // namespace

void MarketSpec::validate() const {
    if (chain.beta.empty()) throw ParameterError("MarketSpec: at least one level is required");
    for (double b : chain.beta) check_beta(b);
    if (steps < 1) throw ParameterError("MarketSpec: steps must be positive");
    if (block_lengths.size() != chain.beta.size())
        throw ParameterError("MarketSpec: one block length per level is required");
    for (std::size_t b : block_lengths)
        if (b < 1) throw ParameterError("MarketSpec: block lengths must be positive");
}

Eigen::MatrixXd simulate_market(const MarketSpec& spec, std::uint64_t seed) {
    spec.validate();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int n = spec.chain.levels();
    const int p = spec.chain.sigma0.dim();
    const bool wishart = spec.chain.model_class == ModelClass::Wishart;
    // Each level is held as a factor F with Sigma_i = F F^T.
    std::vector<Eigen::MatrixXd> factor(static_cast<std::size_t>(n), spec.chain.sigma0.cholesky());
    Eigen::MatrixXd out(p, static_cast<Eigen::Index>(spec.steps));
    for (std::size_t t = 0; t < spec.steps; ++t) {
        bool parent_changed = false;
        for (int i = 0; i < n; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            if (!parent_changed && t % spec.block_lengths[ui] != 0) continue;
            parent_changed = true;
            const Eigen::MatrixXd& prev = i == 0 ? spec.chain.sigma0.cholesky() : factor[ui - 1];
            const double b = spec.chain.beta[ui];
            if (wishart) {
                factor[ui] = wishart_factor_step(prev, b, rng);
            } else {
                const CovMatrix next = sample_inv_wishart_step(CovMatrix(prev * prev.transpose()), b, rng);
                factor[ui] = next.cholesky();
            }
        }
        const Eigen::MatrixXd& f = factor.back();
        Eigen::VectorXd z(f.cols());
        for (Eigen::Index j = 0; j < z.size(); ++j) z(j) = normal(rng);
        out.col(static_cast<Eigen::Index>(t)) = f * z;
    }
    return out;
}

std::vector<std::size_t> default_block_lengths(int levels) {
    if (levels < 1) throw ParameterError("default_block_lengths: levels must be positive");
    std::vector<std::size_t> out(static_cast<std::size_t>(levels));
    std::size_t len = 250;
    for (int i = levels - 1; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = len;
        len *= 4;
    }
    return out;
}

}  // namespace mht
