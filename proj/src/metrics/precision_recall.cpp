#include <algorithm>
#include <atomic>

#include "helio/error.hpp"
#include "helio/metrics.hpp"
#include "helio/parallel.hpp"

namespace helio::metrics {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double squared_distance(const RowMatrix& a, Eigen::Index i, const RowMatrix& b, Eigen::Index j) {
    const double* x = a.data() + i * a.cols();
    const double* y = b.data() + j * b.cols();
    double s = 0.0;
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
        const double diff = x[c] - y[c];
        s += diff * diff;
    }
    return s;
}

/// Squared distance from each row to its k-th nearest other row.
std::vector<double> knn_radii(const RowMatrix& pts, std::size_t k) {
    const auto n = static_cast<std::size_t>(pts.rows());
    std::vector<double> radii(n);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        std::vector<double> dist;
        dist.reserve(n - 1);
        for (std::size_t i = begin; i < end; ++i) {
            dist.clear();
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) dist.push_back(squared_distance(pts, static_cast<Eigen::Index>(i), pts, static_cast<Eigen::Index>(j)));
            }
            std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1), dist.end());
            radii[i] = dist[k - 1];
        }
    });
    return radii;
}

/// Fraction of `queries` rows inside at least one ball of the manifold.
double coverage(const RowMatrix& manifold, const std::vector<double>& radii, const RowMatrix& queries) {
    const auto n = static_cast<std::size_t>(queries.rows());
    std::vector<unsigned char> inside(n, 0);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t q = begin; q < end; ++q) {
            for (Eigen::Index m = 0; m < manifold.rows(); ++m) {
                if (squared_distance(queries, static_cast<Eigen::Index>(q), manifold, m) <= radii[static_cast<std::size_t>(m)]) {
                    inside[q] = 1;
                    break;
                }
            }
        }
    });
    const auto hits = std::count(inside.begin(), inside.end(), 1);
    return static_cast<double>(hits) / static_cast<double>(n);
}

}  // namespace

PrecisionRecall precision_recall(const FeatureSet& real, const FeatureSet& fake, std::size_t k) {
    if (real.dim != fake.dim) fail(ErrorKind::DimMismatch, std::to_string(real.dim) + " vs " + std::to_string(fake.dim));
    if (k == 0 || k >= std::min(real.count(), fake.count())) {
        fail(ErrorKind::KTooLarge, "k=" + std::to_string(k) + " must satisfy 1 <= k < min(" + std::to_string(real.count()) +
                                       ", " + std::to_string(fake.count()) + ")");
    }
    const RowMatrix r = to_matrix(real);
    const RowMatrix f = to_matrix(fake);
    PrecisionRecall out;
    out.k = k;
    out.precision = coverage(r, knn_radii(r, k), f);
    out.recall = coverage(f, knn_radii(f, k), r);
    return out;
}

}  // namespace helio::metrics
