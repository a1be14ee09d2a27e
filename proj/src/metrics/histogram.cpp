#include <cmath>

#include "helio/error.hpp"
#include "helio/metrics.hpp"

namespace helio::metrics {

PixelHistogram pixel_histogram(std::span<const U8Image> images) {
    if (images.empty()) fail(ErrorKind::EmptyInput, "no images for histogram");
    PixelHistogram h;
    for (const auto& img : images) {
        for (std::uint8_t v : img.data) ++h.bins[v];
        h.total += img.data.size();
    }
    if (h.total == 0) fail(ErrorKind::EmptyInput, "images contain no pixels");
    long double weighted = 0.0L;
    for (std::size_t v = 0; v < h.bins.size(); ++v) weighted += static_cast<long double>(v) * h.bins[v];
    h.mean_pixel = static_cast<double>(weighted / h.total);
    return h;
}

TailMass tail_mass(const PixelHistogram& h, int cutoff) {
    if (cutoff < 0 || cutoff > 255) fail(ErrorKind::BadArgs, "cutoff " + std::to_string(cutoff) + " outside [0, 255]");
    if (h.total == 0) fail(ErrorKind::EmptyInput, "empty histogram");
    std::uint64_t below = 0;
    for (int v = 0; v < cutoff; ++v) below += h.bins[static_cast<std::size_t>(v)];
    TailMass t;
    t.left = static_cast<double>(below) / static_cast<double>(h.total);
    t.right = 1.0 - t.left;
    return t;
}

double histogram_l1(const PixelHistogram& a, const PixelHistogram& b) {
    if (a.total == 0 || b.total == 0) fail(ErrorKind::EmptyInput, "empty histogram");
    double d = 0.0;
    for (std::size_t v = 0; v < a.bins.size(); ++v) {
        d += std::abs(static_cast<double>(a.bins[v]) / static_cast<double>(a.total) -
                      static_cast<double>(b.bins[v]) / static_cast<double>(b.total));
    }
    return d;
}

}  // namespace helio::metrics
