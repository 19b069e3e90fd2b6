#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "mht/special_fn.hpp"

namespace mht {

/// Symmetric positive-definite p x p matrix. Construction checks symmetry (1e-12 relative
/// to the largest entry) and a successful Cholesky factorization; the stored matrix is
/// exactly symmetric.
class CovMatrix {
public:
    explicit CovMatrix(const Eigen::MatrixXd& m);
    static CovMatrix identity(int p, double scale = 1.0);

    int dim() const noexcept { return static_cast<int>(m_.rows()); }
    const Eigen::MatrixXd& matrix() const noexcept { return m_; }
    /// Lower Cholesky factor L with L L^T = matrix().
    const Eigen::MatrixXd& cholesky() const noexcept { return chol_; }
    double operator()(int i, int j) const { return m_(i, j); }

private:
    Eigen::MatrixXd m_;
    Eigen::MatrixXd chol_;
};

/// Hierarchical covariance chain Sigma_0 -> Sigma_1 -> ... -> Sigma_N.
struct ChainSpec {
    ModelClass model_class = ModelClass::Wishart;
    std::vector<double> beta;
    CovMatrix sigma0 = CovMatrix::identity(1);

    int levels() const noexcept { return static_cast<int>(beta.size()); }
    void validate() const;
};

/// Symmetric square root by eigendecomposition. Throws DomainError unless positive definite.
Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& a);

/// Standard Wishart W_p(nu, scale) by the Bartlett decomposition; requires nu > p - 1.
Eigen::MatrixXd sample_wishart(const CovMatrix& scale, double nu, std::mt19937_64& rng);

/// Conditional Wishart step: W_p(2 beta, prev / (2 beta)), mean prev. Requires 2 beta > p - 1.
CovMatrix sample_wishart_step(const CovMatrix& prev, double beta, std::mt19937_64& rng);
CovMatrix sample_wishart_step(const CovMatrix& prev, double beta, std::uint64_t seed);

/// Conditional inverse-Wishart step: nu = 2 beta + p + 1, scale 2 beta prev, mean prev.
CovMatrix sample_inv_wishart_step(const CovMatrix& prev, double beta, std::mt19937_64& rng);
CovMatrix sample_inv_wishart_step(const CovMatrix& prev, double beta, std::uint64_t seed);

/// Sigma_N from N successive conditional steps starting at sigma0.
CovMatrix sample_chain(const ChainSpec& spec, std::mt19937_64& rng);
CovMatrix sample_chain(const ChainSpec& spec, std::uint64_t seed);

/// count i.i.d. N(0, sigma) vectors, one per column of the returned p x count matrix.
Eigen::MatrixXd sample_returns(const CovMatrix& sigma, std::size_t count, std::mt19937_64& rng);
Eigen::MatrixXd sample_returns(const CovMatrix& sigma, std::size_t count, std::uint64_t seed);

struct IdentityCheck {
    double lhs = 0.0;
    double rhs = 0.0;
};

/// lhs = det(1 + A^{1/2} r r^T A^{1/2}), rhs = 1 + r^T A r.
IdentityCheck rank1_det_identity(const CovMatrix& a, const Eigen::VectorXd& r);

struct CftCheck {
    double matrix_side = 0.0;
    double matrix_error = 0.0;  // Monte Carlo standard error (quadrature error for p = 1)
    double scalar_side = 0.0;
};

/// Compares the p-dimensional Wishart-weighted integral of exp(-r^T A^{1/2} X A^{1/2} r),
/// with X ~ W_p(2 nu, 1/2), against the scalar result (1 + r^T A r)^{-nu}.
/// Requires nu > (p + 1)/2.
CftCheck verify_gamma_cft(int p, double nu, const CovMatrix& a, const Eigen::VectorXd& r,
                          std::size_t samples = 100000, std::uint64_t seed = 20240917);

/// Synthetic market: Sigma_i is redrawn every block_lengths[i-1] steps (and whenever
/// its parent changes); returns are drawn from N(0, Sigma_N(t)).
struct MarketSpec {
    ChainSpec chain;
    std::size_t steps = 0;
    std::vector<std::size_t> block_lengths;

    void validate() const;
};

/// p x steps matrix of returns.
Eigen::MatrixXd simulate_market(const MarketSpec& spec, std::uint64_t seed);

/// Default block lengths for N levels: slowest level first, each level ~4x faster.
std::vector<std::size_t> default_block_lengths(int levels);

}  // namespace mht
