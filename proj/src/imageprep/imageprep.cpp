#include "helio/imageprep.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "helio/error.hpp"
#include "helio/fits.hpp"
#include "helio/random.hpp"

namespace helio::imageprep {

RawImage to_raw(const fits::FitsImage& img) {
    if (img.naxes.size() > 2 && img.height() != static_cast<std::size_t>(img.naxes[1])) {
        fail(ErrorKind::InvariantViolation, "FITS data cube is not a 2-D image");
    }
    return RawImage{img.width(), img.height(), img.data};
}

double normalize_value(std::int64_t raw, std::int64_t max_dn) {
    if (max_dn < 2) fail(ErrorKind::BadMaxDn, "max_dn must be >= 2, got " + std::to_string(max_dn));
    if (raw <= 1) return 0.0;
    if (raw >= max_dn) return 1.0;
    return std::clamp(std::log(static_cast<double>(raw)) / std::log(static_cast<double>(max_dn)), 0.0, 1.0);
}

NormalizedImage normalize_intensity(const RawImage& raw, std::int64_t max_dn, std::string source_id) {
    if (max_dn < 2) fail(ErrorKind::BadMaxDn, "max_dn must be >= 2, got " + std::to_string(max_dn));
    if (raw.data.size() != raw.width * raw.height) fail(ErrorKind::InvariantViolation, "raw image shape mismatch");
    NormalizedImage out{raw.width, raw.height, std::vector<double>(raw.data.size()), std::move(source_id)};
    const double log_max = std::log(static_cast<double>(max_dn));
    for (std::size_t i = 0; i < raw.data.size(); ++i) {
        const std::int64_t v = raw.data[i];
        if (v <= 1) {
            out.data[i] = 0.0;
        } else if (v >= max_dn) {
            out.data[i] = 1.0;
        } else {
            out.data[i] = std::clamp(std::log(static_cast<double>(v)) / log_max, 0.0, 1.0);
        }
    }
    return out;
}

NormalizedImage normalize_intensity_per_image(const RawImage& raw, std::string source_id) {
    const std::int64_t peak = raw.data.empty() ? 0 : *std::max_element(raw.data.begin(), raw.data.end());
    if (peak < 2) {
        return NormalizedImage{raw.width, raw.height, std::vector<double>(raw.data.size(), 0.0), std::move(source_id)};
    }
    return normalize_intensity(raw, peak, std::move(source_id));
}

NormalizedImage downsample_box(const NormalizedImage& img, std::size_t factor) {
    if (factor == 0 || img.width % factor != 0 || img.height % factor != 0) {
        fail(ErrorKind::NonDivisibleFactor, "factor " + std::to_string(factor) + " does not divide " +
                                                std::to_string(img.width) + "x" + std::to_string(img.height));
    }
    const std::size_t w = img.width / factor;
    const std::size_t h = img.height / factor;
    NormalizedImage out{w, h, std::vector<double>(w * h, 0.0), img.source_id};
    const double inv = 1.0 / static_cast<double>(factor * factor);
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            double s = 0.0;
            for (std::size_t dr = 0; dr < factor; ++dr) {
                const double* src = &img.data[(r * factor + dr) * img.width + c * factor];
                for (std::size_t dc = 0; dc < factor; ++dc) s += src[dc];
            }
            out.data[r * w + c] = std::clamp(s * inv, 0.0, 1.0);
        }
    }
    return out;
}

std::vector<Patch> extract_patches(const NormalizedImage& img, std::size_t size, std::size_t count,
                                   std::uint64_t seed) {
    if (size == 0 || count == 0) fail(ErrorKind::BadArgs, "patch size and count must be positive");
    if (size > img.width || size > img.height) {
        fail(ErrorKind::PatchTooLarge, std::to_string(size) + " exceeds " + std::to_string(img.width) + "x" +
                                           std::to_string(img.height));
    }
    Rng rng(seed);
    const std::size_t rows = img.height - size + 1;
    const std::size_t cols = img.width - size + 1;
    std::vector<Patch> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Patch p;
        p.row = rng.below(rows);
        p.col = rng.below(cols);
        p.size = size;
        p.data.resize(size * size);
        for (std::size_t r = 0; r < size; ++r) {
            const auto src = img.data.begin() + static_cast<std::ptrdiff_t>((p.row + r) * img.width + p.col);
            std::copy(src, src + static_cast<std::ptrdiff_t>(size), p.data.begin() + static_cast<std::ptrdiff_t>(r * size));
        }
        out.push_back(std::move(p));
    }
    return out;
}

std::uint8_t quantize_value(double x) noexcept {
    const double q = std::nearbyint(255.0 * std::clamp(x, 0.0, 1.0));
    return static_cast<std::uint8_t>(q);
}

U8Image quantize_u8(const NormalizedImage& img) {
    U8Image out{img.width, img.height, std::vector<std::uint8_t>(img.data.size())};
    std::transform(img.data.begin(), img.data.end(), out.data.begin(), quantize_value);
    return out;
}

namespace {

struct Arc {
    double base_x, base_y;     // midpoint between footpoints
    double tan_x, tan_y;       // unit tangent to the limb
    double out_x, out_y;       // unit outward normal
    double half_span, height;
};

}  // namespace

NormalizedImage synth_sun(const SynthParams& p) {
    if (p.resolution < 8) fail(ErrorKind::InvariantViolation, "resolution must be >= 8");
    if (!(p.disc_radius_frac > 0.0 && p.disc_radius_frac < 1.0)) {
        fail(ErrorKind::InvariantViolation, "disc_radius_frac must lie in (0, 1)");
    }
    if (!(p.loop_density >= 0.0) || !std::isfinite(p.loop_density)) {
        fail(ErrorKind::InvariantViolation, "loop_density must be finite and >= 0");
    }
    if (!(p.noise_scale >= 0.0) || !std::isfinite(p.noise_scale)) {
        fail(ErrorKind::InvariantViolation, "noise_scale must be finite and >= 0");
    }

    const std::size_t n = p.resolution;
    const double res = static_cast<double>(n);
    const double center = (res - 1.0) / 2.0;
    const double radius = p.disc_radius_frac * res / 2.0;
    const double corona_scale = 0.04 * res;

    NormalizedImage img{n, n, std::vector<double>(n * n), "synth-" + std::to_string(p.seed)};
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            const double dx = static_cast<double>(c) - center;
            const double dy = static_cast<double>(r) - center;
            const double d = std::sqrt(dx * dx + dy * dy);
            double v;
            if (d <= radius) {
                const double rel = d / radius;
                v = 0.55 + 0.15 * rel * rel * rel * rel;
            } else {
                v = 0.08 + 0.62 * std::exp(-(d - radius) / corona_scale);
            }
            img.data[r * n + c] = v;
        }
    }

    Rng rng(p.seed);

    for (std::size_t h = 0; h < p.hole_count; ++h) {
        const double ang = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double rad = radius * 0.7 * std::sqrt(rng.uniform());
        const double hx = center + rad * std::cos(ang);
        const double hy = center + rad * std::sin(ang);
        const double size = radius * rng.uniform(0.06, 0.14);
        const double stretch = rng.uniform(0.6, 1.6);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < n; ++c) {
                const double qx = (static_cast<double>(c) - hx) / (size * stretch);
                const double qy = (static_cast<double>(r) - hy) / size;
                const double q2 = qx * qx + qy * qy;
                if (q2 < 16.0) img.data[r * n + c] *= 1.0 - 0.75 * std::exp(-q2);
            }
        }
    }

    // Arc count: integer part of the density plus one more with probability
    // equal to the fractional part.
    std::size_t n_arcs = static_cast<std::size_t>(std::floor(p.loop_density));
    if (rng.uniform() < p.loop_density - std::floor(p.loop_density)) ++n_arcs;
    if (n_arcs > 0) {
        std::vector<double> layer(n * n, 0.0);
        const double width = std::max(1.0, 0.006 * res);
        const int reach = static_cast<int>(std::ceil(3.0 * width));
        for (std::size_t a = 0; a < n_arcs; ++a) {
            const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
            const double foot_r = radius * rng.uniform(0.88, 0.98);
            Arc arc{};
            arc.out_x = std::cos(theta);
            arc.out_y = std::sin(theta);
            arc.tan_x = -arc.out_y;
            arc.tan_y = arc.out_x;
            arc.base_x = center + foot_r * arc.out_x;
            arc.base_y = center + foot_r * arc.out_y;
            arc.half_span = radius * rng.uniform(0.05, 0.12);
            arc.height = radius * rng.uniform(0.08, 0.2);
            const double amp = rng.uniform(0.2, 0.3);
            const std::size_t steps = static_cast<std::size_t>(std::ceil(4.0 * (arc.half_span + arc.height)));
            for (std::size_t s = 0; s <= steps; ++s) {
                const double t = std::numbers::pi * static_cast<double>(s) / static_cast<double>(steps);
                const double px = arc.base_x + std::cos(t) * arc.half_span * arc.tan_x + std::sin(t) * arc.height * arc.out_x;
                const double py = arc.base_y + std::cos(t) * arc.half_span * arc.tan_y + std::sin(t) * arc.height * arc.out_y;
                const int pc = static_cast<int>(std::lround(px));
                const int pr = static_cast<int>(std::lround(py));
                for (int rr = pr - reach; rr <= pr + reach; ++rr) {
                    if (rr < 0 || rr >= static_cast<int>(n)) continue;
                    for (int cc = pc - reach; cc <= pc + reach; ++cc) {
                        if (cc < 0 || cc >= static_cast<int>(n)) continue;
                        const double ex = cc - px;
                        const double ey = rr - py;
                        const double g = amp * std::exp(-(ex * ex + ey * ey) / (2.0 * width * width));
                        double& cell = layer[static_cast<std::size_t>(rr) * n + static_cast<std::size_t>(cc)];
                        cell = std::max(cell, g);
                    }
                }
            }
        }
        for (std::size_t i = 0; i < n * n; ++i) img.data[i] += layer[i];
    }

    for (auto& v : img.data) {
        if (p.noise_scale > 0.0) v += p.noise_scale * rng.normal();
        v = std::clamp(v, 0.0, 1.0);
    }
    return img;
}

}  // namespace helio::imageprep
