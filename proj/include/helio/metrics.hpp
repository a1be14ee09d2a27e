#pragma once

// Metric engine over feature sets: Gaussian statistics, Frechet distance,
// unbiased KID, k-NN precision/recall, patch-FID, and pixel histograms.

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "helio/featstore.hpp"
#include "helio/imageprep.hpp"

namespace helio::metrics {

using featstore::FeatureSet;
using imageprep::NormalizedImage;
using imageprep::Patch;
using imageprep::U8Image;

inline constexpr std::size_t kDefaultKidSubsetSize = 1000;
inline constexpr std::size_t kDefaultKidSubsets = 100;
inline constexpr std::size_t kDefaultPrK = 3;
inline constexpr std::size_t kDefaultSampleBudget = 50000;
/// Fréchet values in [-kNegativeClamp, 0) are rounding noise and become 0.
inline constexpr double kNegativeClamp = 1e-6;

struct GaussianStats {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    std::size_t n = 0;
};

/// Feature rows as a double matrix (count x dim).
Eigen::MatrixXd to_matrix(const FeatureSet& fs);

/// Sample mean and unbiased (n - 1) covariance, symmetrized.
/// Throws TooFewSamples when n < 2.
GaussianStats gaussian_stats(const FeatureSet& fs);
GaussianStats gaussian_stats(const Eigen::MatrixXd& rows);

/// Principal square root of a symmetric PSD matrix via eigendecomposition.
/// Eigenvalues in [-tol, 0) are clamped to 0, tol = 1e-10 * sum |lambda|.
/// Throws NotSymmetric, NotPsd.
Eigen::MatrixXd sqrtm_psd(const Eigen::MatrixXd& m);

/// |mu_a - mu_b|^2 + tr(Sa) + tr(Sb) - 2 tr((Sa^1/2 Sb Sa^1/2)^1/2).
/// Throws DimMismatch, Numerics (result below -kNegativeClamp).
double frechet_distance(const GaussianStats& a, const GaussianStats& b);

struct KidResult {
    double mean = 0.0;
    double std = 0.0;  // sample (n - 1) deviation over subsets; 0 for one subset
    std::size_t subset_size = 0;
    std::size_t n_subsets = 0;
};

/// Polynomial kernel (u.v / d + 1)^3.
double kid_kernel(std::span<const double> u, std::span<const double> v);

/// Unbiased MMD^2 between two equal-size samples (rows), diagonal terms
/// excluded from the within-set sums.
double mmd2_unbiased(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

/// KID over seeded random subsets drawn without replacement.
/// Throws DimMismatch, SubsetTooLarge, BadArgs.
KidResult kid(const FeatureSet& x, const FeatureSet& y, std::size_t subset_size, std::size_t n_subsets,
              std::uint64_t seed);

struct PrecisionRecall {
    double precision = 0.0;
    double recall = 0.0;
    std::size_t k = 0;
};

/// k-NN manifold precision and recall. A point belongs to a manifold when it
/// lies within (<=) the k-th nearest-neighbour radius of some point of the
/// other set, neighbours counted excluding the point itself.
/// Throws DimMismatch, KTooLarge.
PrecisionRecall precision_recall(const FeatureSet& real, const FeatureSet& fake, std::size_t k = kDefaultPrK);

/// Maps a batch of patches to a feature set.
using PatchFeaturizer = std::function<FeatureSet(std::span<const Patch>)>;

/// Flattened pixels.
PatchFeaturizer identity_featurizer();
/// Box-pooled pixels, (size / pool)^2 dims.
PatchFeaturizer pooled_featurizer(std::size_t pool);
/// Box-pooled pixels projected onto the rows of `components` after
/// subtracting `mean`.
PatchFeaturizer projection_featurizer(Eigen::VectorXd mean, Eigen::MatrixXd components, std::size_t pool);

/// Patch sampler shared by patch-FID. Patches are spread evenly over the
/// images (floor(n / N) each, the remainder assigned to seeded distinct
/// images); image i draws its origins from a stream keyed by (seed, i), so
/// corpora of equal size and shape are sampled at identical positions.
std::vector<Patch> sample_patches(std::span<const NormalizedImage> images, std::size_t size, std::size_t n_patches,
                                  std::uint64_t seed);

/// FID between featurized patch sets of the two corpora. Both sides use the
/// same seed.
double patch_fid(std::span<const NormalizedImage> real, std::span<const NormalizedImage> fake, std::size_t size,
                 std::size_t n_patches, const PatchFeaturizer& featurize, std::uint64_t seed);

struct PixelHistogram {
    std::array<std::uint64_t, 256> bins{};
    std::uint64_t total = 0;
    double mean_pixel = 0.0;
};

/// Throws EmptyInput.
PixelHistogram pixel_histogram(std::span<const U8Image> images);

struct TailMass {
    double left = 0.0;   // fraction of pixels < cutoff
    double right = 0.0;  // fraction >= cutoff
};

/// cutoff in [0, 255]; throws BadArgs otherwise.
TailMass tail_mass(const PixelHistogram& h, int cutoff);

/// L1 distance between the normalized histograms.
double histogram_l1(const PixelHistogram& a, const PixelHistogram& b);

/// Named metric values for one model, kept in insertion order.
struct MetricReport {
    std::string model_id;
    std::vector<std::pair<std::string, double>> values;

    void set(std::string_view name, double value);
    [[nodiscard]] std::optional<double> get(std::string_view name) const;
};

/// Clamps FID-family values, range-checks precision/recall.
/// Throws InvariantViolation.
void validate(MetricReport& report);

/// Column label for a Fréchet distance computed on features from `extractor_id`
/// ("FID", "rFID", "CLIP-FID", "MAE-SOL-FD", ...). Unknown extractors map to
/// "FD[<id>]".
std::string frechet_label(std::string_view extractor_id);

}  // namespace helio::metrics
