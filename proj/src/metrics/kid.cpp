#include <cmath>
#include <numeric>

#include "helio/error.hpp"
#include "helio/metrics.hpp"
#include "helio/parallel.hpp"
#include "helio/random.hpp"

namespace helio::metrics {

namespace {

/// Sum of the kernel matrix, optionally without its diagonal. Row sums are
/// combined by pairwise summation so the order is fixed.
double kernel_sum(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, bool skip_diagonal) {
    const double inv_d = 1.0 / static_cast<double>(x.cols());
    const Eigen::MatrixXd gram = x * y.transpose();
    std::vector<double> row_sums(static_cast<std::size_t>(gram.rows()));
    parallel_for(row_sums.size(), [&](std::size_t begin, std::size_t end) {
        std::vector<double> terms(static_cast<std::size_t>(gram.cols()));
        for (std::size_t i = begin; i < end; ++i) {
            for (std::size_t j = 0; j < terms.size(); ++j) {
                if (skip_diagonal && i == j) {
                    terms[j] = 0.0;
                    continue;
                }
                const double base = gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * inv_d + 1.0;
                terms[j] = base * base * base;
            }
            row_sums[i] = pairwise_sum(terms);
        }
    });
    return pairwise_sum(row_sums);
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, std::span<const std::size_t> idx) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), m.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(idx[i]));
    return out;
}

}  // namespace

double kid_kernel(std::span<const double> u, std::span<const double> v) {
    double dot = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * v[i];
    const double base = dot / static_cast<double>(u.size()) + 1.0;
    return base * base * base;
}

double mmd2_unbiased(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    if (x.cols() != y.cols()) fail(ErrorKind::DimMismatch, "feature dims differ");
    const double m = static_cast<double>(x.rows());
    const double n = static_cast<double>(y.rows());
    if (x.rows() < 2 || y.rows() < 2) fail(ErrorKind::TooFewSamples, "MMD needs at least 2 rows per set");
    const double kxx = kernel_sum(x, x, true) / (m * (m - 1.0));
    const double kyy = kernel_sum(y, y, true) / (n * (n - 1.0));
    const double kxy = kernel_sum(x, y, false) / (m * n);
    return kxx + kyy - 2.0 * kxy;
}

KidResult kid(const FeatureSet& x, const FeatureSet& y, std::size_t subset_size, std::size_t n_subsets,
              std::uint64_t seed) {
    if (x.dim != y.dim) fail(ErrorKind::DimMismatch, std::to_string(x.dim) + " vs " + std::to_string(y.dim));
    if (n_subsets == 0) fail(ErrorKind::BadArgs, "n_subsets must be positive");
    if (subset_size < 2) fail(ErrorKind::BadArgs, "subset_size must be at least 2");
    if (subset_size > std::min(x.count(), y.count())) {
        fail(ErrorKind::SubsetTooLarge, std::to_string(subset_size) + " exceeds min(" + std::to_string(x.count()) +
                                            ", " + std::to_string(y.count()) + ")");
    }
    const Eigen::MatrixXd xm = to_matrix(x);
    const Eigen::MatrixXd ym = to_matrix(y);

    Rng rng_x(derive_seed(seed, "kid-x"));
    Rng rng_y(derive_seed(seed, "kid-y"));
    std::vector<std::size_t> ix(x.count());
    std::vector<std::size_t> iy(y.count());
    std::vector<double> estimates;
    estimates.reserve(n_subsets);
    for (std::size_t s = 0; s < n_subsets; ++s) {
        std::iota(ix.begin(), ix.end(), 0);
        std::iota(iy.begin(), iy.end(), 0);
        rng_x.shuffle(std::span(ix));
        rng_y.shuffle(std::span(iy));
        estimates.push_back(mmd2_unbiased(select_rows(xm, std::span(ix).first(subset_size)),
                                          select_rows(ym, std::span(iy).first(subset_size))));
    }

    KidResult r;
    r.subset_size = subset_size;
    r.n_subsets = n_subsets;
    r.mean = pairwise_sum(estimates) / static_cast<double>(n_subsets);
    if (n_subsets > 1) {
        std::vector<double> sq(estimates.size());
        for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = (estimates[i] - r.mean) * (estimates[i] - r.mean);
        r.std = std::sqrt(pairwise_sum(sq) / static_cast<double>(n_subsets - 1));
    }
    return r;
}

}  // namespace helio::metrics
