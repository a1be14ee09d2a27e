#pragma once

// PCA over banks of intermediate latent vectors and coordinate edits along
// the resulting directions.

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <vector>

#include "helio/featstore.hpp"

namespace helio::latentlab {

struct LatentBank {
    std::string space_id = "W";
    Eigen::MatrixXd vectors;  // n x w
};

struct PcaDirections {
    std::string space_id;
    Eigen::MatrixXd components;  // k x w, orthonormal rows
    Eigen::VectorXd eigenvalues;  // k, non-increasing, non-negative
    Eigen::VectorXd mean;         // w
    double total_variance = 0.0;
};

LatentBank from_features(const featstore::FeatureSet& fs);
featstore::FeatureSet to_features(const LatentBank& bank);

/// Fewer samples than dimensions; PCA still runs.
bool underdetermined(const LatentBank& bank) noexcept;

/// Top-k principal directions of the mean-centred sample covariance
/// (divisor n - 1), each flipped so its largest-magnitude coordinate is
/// positive. Throws KTooLarge (k == 0 or k > min(n - 1, w)), DegenerateData,
/// NonFiniteValue.
PcaDirections pca(const LatentBank& bank, std::size_t k);

/// Coordinates of x along every component: V (x - mean).
Eigen::VectorXd project(const PcaDirections& dirs, const Eigen::VectorXd& x);

/// mean + V^T coords.
Eigen::VectorXd reconstruct(const PcaDirections& dirs, const Eigen::VectorXd& coords);

/// For each c in coords: base moved along component `component` so that its
/// coordinate there equals c; other coordinates are untouched.
/// Throws BadComponent, DimMismatch.
std::vector<Eigen::VectorXd> edit_sequence(const PcaDirections& dirs, const Eigen::VectorXd& base,
                                           std::size_t component, const std::vector<double>& coords);

/// Mean squared reconstruction error of the bank using the first k components.
double reconstruction_error(const LatentBank& bank, const PcaDirections& dirs, std::size_t k);

/// Applies the sign rule to one direction in place.
void canonical_sign(Eigen::Ref<Eigen::VectorXd> v);

}  // namespace helio::latentlab
