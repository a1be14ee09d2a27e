#include "helio/latentlab.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "helio/error.hpp"

namespace helio::latentlab {

namespace {

/// Eigenvalues this far below the total are numerical zeros.
constexpr double kZeroEigen = 1e-12;

}  // namespace

LatentBank from_features(const featstore::FeatureSet& fs) {
    LatentBank bank;
    bank.space_id = fs.extractor_id;
    bank.vectors.resize(static_cast<Eigen::Index>(fs.count()), static_cast<Eigen::Index>(fs.dim));
    for (std::size_t i = 0; i < fs.count(); ++i) {
        const auto row = fs.row(i);
        for (std::size_t j = 0; j < fs.dim; ++j) bank.vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
    }
    return bank;
}

featstore::FeatureSet to_features(const LatentBank& bank) {
    featstore::FeatureSet fs;
    fs.extractor_id = bank.space_id;
    fs.dim = static_cast<std::size_t>(bank.vectors.cols());
    std::vector<float> row(fs.dim);
    for (Eigen::Index i = 0; i < bank.vectors.rows(); ++i) {
        for (std::size_t j = 0; j < fs.dim; ++j) row[j] = static_cast<float>(bank.vectors(i, static_cast<Eigen::Index>(j)));
        fs.push_back(std::to_string(i), row);
    }
    return fs;
}

bool underdetermined(const LatentBank& bank) noexcept { return bank.vectors.rows() < bank.vectors.cols(); }

void canonical_sign(Eigen::Ref<Eigen::VectorXd> v) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        // First index wins ties.
        if (std::abs(v[i]) > best) {
            best = std::abs(v[i]);
            arg = i;
        }
    }
    if (v.size() > 0 && v[arg] < 0.0) v = -v;
}

PcaDirections pca(const LatentBank& bank, std::size_t k) {
    const Eigen::Index n = bank.vectors.rows();
    const Eigen::Index w = bank.vectors.cols();
    if (!bank.vectors.allFinite()) fail(ErrorKind::NonFiniteValue, "latent bank contains NaN or infinity");
    if (k == 0 || n < 2 || static_cast<Eigen::Index>(k) > std::min(n - 1, w)) {
        fail(ErrorKind::KTooLarge, "k=" + std::to_string(k) + " must lie in [1, min(n-1, w)] with n=" + std::to_string(n) +
                                       ", w=" + std::to_string(w));
    }
    PcaDirections out;
    out.space_id = bank.space_id;
    out.mean = bank.vectors.colwise().mean().transpose();
    const Eigen::MatrixXd centered = bank.vectors.rowwise() - out.mean.transpose();
    Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
    cov = 0.5 * (cov + cov.transpose());
    out.total_variance = cov.trace();
    if (!(out.total_variance > 0.0)) fail(ErrorKind::DegenerateData, "latent bank has zero variance");

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) fail(ErrorKind::Numerics, "eigendecomposition did not converge");
    // Eigen sorts ascending.
    out.components.resize(static_cast<Eigen::Index>(k), w);
    out.eigenvalues.resize(static_cast<Eigen::Index>(k));
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(k); ++i) {
        const Eigen::Index src = w - 1 - i;
        double lambda = eig.eigenvalues()[src];
        if (lambda < kZeroEigen * out.total_variance) lambda = 0.0;
        out.eigenvalues[i] = lambda;
        Eigen::VectorXd v = eig.eigenvectors().col(src);
        canonical_sign(v);
        out.components.row(i) = v.transpose();
    }
    return out;
}

Eigen::VectorXd project(const PcaDirections& dirs, const Eigen::VectorXd& x) {
    if (x.size() != dirs.mean.size()) fail(ErrorKind::DimMismatch, "vector has wrong dimension");
    return dirs.components * (x - dirs.mean);
}

Eigen::VectorXd reconstruct(const PcaDirections& dirs, const Eigen::VectorXd& coords) {
    if (coords.size() != dirs.components.rows()) fail(ErrorKind::DimMismatch, "coordinate count differs from k");
    return dirs.mean + dirs.components.transpose() * coords;
}

std::vector<Eigen::VectorXd> edit_sequence(const PcaDirections& dirs, const Eigen::VectorXd& base,
                                           std::size_t component, const std::vector<double>& coords) {
    if (component >= static_cast<std::size_t>(dirs.components.rows())) {
        fail(ErrorKind::BadComponent, "component " + std::to_string(component) + " >= k=" +
                                          std::to_string(dirs.components.rows()));
    }
    if (base.size() != dirs.mean.size()) fail(ErrorKind::DimMismatch, "base vector has wrong dimension");
    const Eigen::VectorXd v = dirs.components.row(static_cast<Eigen::Index>(component)).transpose();
    const double current = v.dot(base - dirs.mean);
    std::vector<Eigen::VectorXd> out;
    out.reserve(coords.size());
    for (double c : coords) {
        if (c == current) {
            out.push_back(base);
        } else {
            out.push_back(base + (c - current) * v);
        }
    }
    return out;
}

double reconstruction_error(const LatentBank& bank, const PcaDirections& dirs, std::size_t k) {
    if (k > static_cast<std::size_t>(dirs.components.rows())) fail(ErrorKind::KTooLarge, "k exceeds available components");
    const Eigen::MatrixXd centered = bank.vectors.rowwise() - dirs.mean.transpose();
    const auto basis = dirs.components.topRows(static_cast<Eigen::Index>(k));
    const Eigen::MatrixXd approx = (centered * basis.transpose()) * basis;
    return (centered - approx).squaredNorm() / static_cast<double>(bank.vectors.rows());
}

}  // namespace helio::latentlab
