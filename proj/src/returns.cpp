#include <cmath>
#include <string>

#include "mht/error.hpp"
#include "mht/pipeline.hpp"

namespace mht {

ReturnsMatrix log_returns(const PriceTable& prices, int dt_days) {
    if (dt_days < 1) throw ParameterError("log_returns: dt_days must be positive");
    const Eigen::Index dates = prices.close.cols();
    if (dates <= dt_days) throw DataError("log_returns: not enough dates for the return horizon");
    ReturnsMatrix r;
    r.tickers = prices.tickers;
    const Eigen::Index t = dates - dt_days;
    const Eigen::MatrixXd logp = prices.close.array().log().matrix();
    r.values = logp.rightCols(t) - logp.leftCols(t);
    return r;
}

ReturnsMatrix normalize(const ReturnsMatrix& r) {
    if (r.length() == 0) throw DataError("normalize: empty returns");
    ReturnsMatrix out = r;
    const double n = static_cast<double>(r.length());
    for (Eigen::Index i = 0; i < out.values.rows(); ++i) {
        auto row = out.values.row(i);
        const double m = row.mean();
        row.array() -= m;
        const double sd = std::sqrt(row.squaredNorm() / n);
        const double scale = std::max(1.0, std::abs(m));
        if (!(sd > 1e-14 * scale)) {
            const std::string name =
                static_cast<std::size_t>(i) < r.tickers.size() ? r.tickers[static_cast<std::size_t>(i)] : std::to_string(i);
            throw DataError("normalize: zero variance for asset " + name);
        }
        row /= sd;
    }
    out.normalized = true;
    out.whitened = false;
    return out;
}

Eigen::MatrixXd correlation(const ReturnsMatrix& r) {
    if (r.length() == 0) throw DataError("correlation: empty returns");
    Eigen::MatrixXd c = r.values * r.values.transpose() / static_cast<double>(r.length());
    c = 0.5 * (c + c.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c);
    if (eig.eigenvalues().minCoeff() < 0.0) {
        const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
        c = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
        c = 0.5 * (c + c.transpose());
    }
    return c;
}

Whitening rotate_whiten(const ReturnsMatrix& r, const Eigen::MatrixXd& c) {
    if (!r.normalized) throw ParameterError("rotate_whiten: returns must be normalized");
    const Eigen::Index p = c.rows();
    if (c.cols() != p || p != r.values.rows()) throw ParameterError("rotate_whiten: dimension mismatch");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (c + c.transpose()));
    if (eig.info() != Eigen::Success) throw NumericalError("rotate_whiten: eigendecomposition failed");

    Whitening w;
    w.eigenvalues = eig.eigenvalues().reverse();
    w.eigenvectors = eig.eigenvectors().rowwise().reverse();
    for (Eigen::Index k = 0; k < p; ++k) {
        auto v = w.eigenvectors.col(k);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0.0) v = -v;
        if (w.eigenvalues(k) < 1e-10) {
            w.eigenvalues(k) = 1e-10;
            ++w.floored;
        }
    }
    if (w.floored > 0)
        w.warnings.push_back(std::to_string(w.floored) + " correlation eigenvalues floored at 1e-10");
    if (static_cast<double>(w.floored) > static_cast<double>(p) / 10.0)
        throw DataError("rotate_whiten: correlation matrix is rank deficient");

    w.returns.tickers = r.tickers;
    w.returns.values = w.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal() * (w.eigenvectors.transpose() * r.values);
    w.returns.normalized = true;
    w.returns.whitened = true;
    return w;
}

std::vector<double> aggregate(const ReturnsMatrix& r) {
    if (!r.whitened) throw ParameterError("aggregate: returns must be whitened");
    std::vector<double> out;
    out.reserve(r.assets() * r.length());
    for (Eigen::Index i = 0; i < r.values.rows(); ++i)
        for (Eigen::Index t = 0; t < r.values.cols(); ++t) out.push_back(r.values(i, t));
    return out;
}

}  // namespace mht
