#include <numeric>

#include "helio/error.hpp"
#include "helio/metrics.hpp"
#include "helio/random.hpp"

namespace helio::metrics {

namespace {

std::vector<float> pool_patch(const Patch& p, std::size_t pool) {
    const std::size_t out = p.size / pool;
    std::vector<float> v(out * out);
    const double inv = 1.0 / static_cast<double>(pool * pool);
    for (std::size_t r = 0; r < out; ++r) {
        for (std::size_t c = 0; c < out; ++c) {
            double s = 0.0;
            for (std::size_t dr = 0; dr < pool; ++dr) {
                for (std::size_t dc = 0; dc < pool; ++dc) s += p.data[(r * pool + dr) * p.size + c * pool + dc];
            }
            v[r * out + c] = static_cast<float>(s * inv);
        }
    }
    return v;
}

void check_pool(std::span<const Patch> patches, std::size_t pool) {
    if (pool == 0) fail(ErrorKind::BadArgs, "pool factor must be positive");
    for (const auto& p : patches) {
        if (p.size % pool != 0) {
            fail(ErrorKind::NonDivisibleFactor, "pool " + std::to_string(pool) + " does not divide patch size " + std::to_string(p.size));
        }
    }
}

}  // namespace

PatchFeaturizer identity_featurizer() { return pooled_featurizer(1); }

PatchFeaturizer pooled_featurizer(std::size_t pool) {
    return [pool](std::span<const Patch> patches) {
        check_pool(patches, pool);
        FeatureSet fs;
        fs.extractor_id = pool == 1 ? "identity" : "pooled-" + std::to_string(pool);
        fs.dim = patches.empty() ? 0 : (patches[0].size / pool) * (patches[0].size / pool);
        for (std::size_t i = 0; i < patches.size(); ++i) fs.push_back(std::to_string(i), pool_patch(patches[i], pool));
        return fs;
    };
}

PatchFeaturizer projection_featurizer(Eigen::VectorXd mean, Eigen::MatrixXd components, std::size_t pool) {
    if (components.cols() != mean.size()) fail(ErrorKind::DimMismatch, "projection mean and components disagree");
    return [mean = std::move(mean), components = std::move(components), pool](std::span<const Patch> patches) {
        check_pool(patches, pool);
        FeatureSet fs;
        fs.extractor_id = "projection-" + std::to_string(components.rows());
        fs.dim = static_cast<std::size_t>(components.rows());
        std::vector<float> out(fs.dim);
        for (std::size_t i = 0; i < patches.size(); ++i) {
            const auto pooled = pool_patch(patches[i], pool);
            if (static_cast<Eigen::Index>(pooled.size()) != mean.size()) {
                fail(ErrorKind::DimMismatch, "pooled patch has " + std::to_string(pooled.size()) + " values, projection expects " +
                                                 std::to_string(mean.size()));
            }
            const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXf>(pooled.data(), mean.size()).cast<double>() - mean;
            const Eigen::VectorXd y = components * x;
            for (std::size_t j = 0; j < fs.dim; ++j) out[j] = static_cast<float>(y[static_cast<Eigen::Index>(j)]);
            fs.push_back(std::to_string(i), out);
        }
        return fs;
    };
}

std::vector<Patch> sample_patches(std::span<const NormalizedImage> images, std::size_t size, std::size_t n_patches,
                                  std::uint64_t seed) {
    if (images.empty()) fail(ErrorKind::EmptyInput, "no images to sample patches from");
    if (n_patches == 0) fail(ErrorKind::BadArgs, "n_patches must be positive");
    const std::size_t n_images = images.size();
    std::vector<std::size_t> quota(n_images, n_patches / n_images);
    std::vector<std::size_t> order(n_images);
    std::iota(order.begin(), order.end(), 0);
    Rng alloc(derive_seed(seed, "patch-allocation"));
    alloc.shuffle(std::span(order));
    for (std::size_t i = 0; i < n_patches % n_images; ++i) ++quota[order[i]];

    std::vector<Patch> out;
    out.reserve(n_patches);
    for (std::size_t i = 0; i < n_images; ++i) {
        if (quota[i] == 0) continue;
        // Keyed by position, so equal-size corpora share origins.
        const std::uint64_t stream = derive_seed(seed, "image-" + std::to_string(i));
        auto patches = imageprep::extract_patches(images[i], size, quota[i], stream);
        std::move(patches.begin(), patches.end(), std::back_inserter(out));
    }
    return out;
}

double patch_fid(std::span<const NormalizedImage> real, std::span<const NormalizedImage> fake, std::size_t size,
                 std::size_t n_patches, const PatchFeaturizer& featurize, std::uint64_t seed) {
    const auto real_patches = sample_patches(real, size, n_patches, seed);
    const auto fake_patches = sample_patches(fake, size, n_patches, seed);
    const FeatureSet fr = featurize(real_patches);
    const FeatureSet ff = featurize(fake_patches);
    if (fr.dim != ff.dim) fail(ErrorKind::DimMismatch, "featurizer produced unequal dims");
    return frechet_distance(gaussian_stats(fr), gaussian_stats(ff));
}

}  // namespace helio::metrics
