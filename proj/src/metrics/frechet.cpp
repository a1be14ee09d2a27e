#include <Eigen/Eigenvalues>
#include <cmath>

#include "helio/error.hpp"
#include "helio/metrics.hpp"

namespace helio::metrics {

namespace {

constexpr std::size_t kCovBlockRows = 1024;
constexpr double kSymmetryTol = 1e-9;
constexpr double kEigenTol = 1e-10;

void check_symmetric(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) fail(ErrorKind::NotSymmetric, "matrix is not square");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymmetryTol * scale) {
        fail(ErrorKind::NotSymmetric, "asymmetry " + std::to_string(asym) + " exceeds tolerance");
    }
}

/// Eigenvalues clamped at zero, or NotPsd when one is below -tol.
Eigen::VectorXd clamped_eigenvalues(const Eigen::VectorXd& lambda) {
    const double tol = kEigenTol * lambda.cwiseAbs().sum();
    Eigen::VectorXd out = lambda;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        if (out[i] < -tol) fail(ErrorKind::NotPsd, "eigenvalue " + std::to_string(out[i]) + " below -" + std::to_string(tol));
        if (out[i] < 0.0) out[i] = 0.0;
    }
    return out;
}

}  // namespace

Eigen::MatrixXd to_matrix(const FeatureSet& fs) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(fs.count()), static_cast<Eigen::Index>(fs.dim));
    for (std::size_t i = 0; i < fs.count(); ++i) {
        const auto row = fs.row(i);
        for (std::size_t j = 0; j < fs.dim; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
    }
    return m;
}

GaussianStats gaussian_stats(const Eigen::MatrixXd& rows) {
    const Eigen::Index n = rows.rows();
    if (n < 2) fail(ErrorKind::TooFewSamples, "need at least 2 samples, got " + std::to_string(n));
    GaussianStats s;
    s.n = static_cast<std::size_t>(n);
    s.mean = rows.colwise().mean().transpose();
    const Eigen::Index d = rows.cols();
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index start = 0; start < n; start += kCovBlockRows) {
        const Eigen::Index len = std::min<Eigen::Index>(kCovBlockRows, n - start);
        const Eigen::MatrixXd centered = rows.middleRows(start, len).rowwise() - s.mean.transpose();
        acc.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose());
    }
    acc.triangularView<Eigen::StrictlyUpper>() = acc.transpose();
    s.cov = acc / static_cast<double>(n - 1);
    return s;
}

GaussianStats gaussian_stats(const FeatureSet& fs) {
    if (fs.count() < 2) fail(ErrorKind::TooFewSamples, "need at least 2 samples, got " + std::to_string(fs.count()));
    return gaussian_stats(to_matrix(fs));
}

Eigen::MatrixXd sqrtm_psd(const Eigen::MatrixXd& m) {
    check_symmetric(m);
    if (m.size() == 0) return m;
    const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    if (eig.info() != Eigen::Success) fail(ErrorKind::Numerics, "eigendecomposition did not converge");
    const Eigen::VectorXd roots = clamped_eigenvalues(eig.eigenvalues()).cwiseSqrt();
    Eigen::MatrixXd s = eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
    s = 0.5 * (s + s.transpose());
#ifndef NDEBUG
    const double residual = (s * s - sym).norm();
    if (residual > 1e-6 * std::max(sym.norm(), 1e-300)) {
        fail(ErrorKind::Numerics, "square root self-check failed, residual " + std::to_string(residual));
    }
#endif
    return s;
}

double frechet_distance(const GaussianStats& a, const GaussianStats& b) {
    if (a.mean.size() != b.mean.size() || a.cov.rows() != b.cov.rows() || a.cov.rows() != a.mean.size()) {
        fail(ErrorKind::DimMismatch, std::to_string(a.mean.size()) + " vs " + std::to_string(b.mean.size()));
    }
    if (a.mean == b.mean && a.cov == b.cov) return 0.0;

    const Eigen::MatrixXd root_a = sqrtm_psd(a.cov);
    Eigen::MatrixXd inner = root_a * b.cov * root_a;
    inner = 0.5 * (inner + inner.transpose());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(inner, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) fail(ErrorKind::Numerics, "eigendecomposition did not converge");
    const double tr_sqrt = clamped_eigenvalues(eig.eigenvalues()).cwiseSqrt().sum();

    const double fd = (a.mean - b.mean).squaredNorm() + a.cov.trace() + b.cov.trace() - 2.0 * tr_sqrt;
    if (fd < 0.0) {
        if (fd >= -kNegativeClamp) return 0.0;
        fail(ErrorKind::Numerics, "Frechet distance " + std::to_string(fd) + " is negative");
    }
    return fd;
}

}  // namespace helio::metrics
