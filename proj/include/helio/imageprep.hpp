#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace helio::fits {
struct FitsImage;
}

namespace helio::imageprep {

/// Instrument ceiling for 14-bit AIA detectors.
inline constexpr std::int64_t kDefaultMaxDn = 16383;

/// Row-major raw DN counts.
struct RawImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::int64_t> data;
};

/// Row-major image with every pixel in [0, 1].
struct NormalizedImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> data;
    std::string source_id;

    [[nodiscard]] double at(std::size_t row, std::size_t col) const { return data[row * width + col]; }
    friend bool operator==(const NormalizedImage&, const NormalizedImage&) = default;
};

struct U8Image {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> data;

    friend bool operator==(const U8Image&, const U8Image&) = default;
};

struct Patch {
    std::vector<double> data;  // size * size, row-major
    std::size_t row = 0;
    std::size_t col = 0;
    std::size_t size = 0;
};

struct SynthParams {
    std::size_t resolution = 256;
    double disc_radius_frac = 0.8;
    double loop_density = 0.0;
    std::size_t hole_count = 0;
    double noise_scale = 0.0;
    std::uint64_t seed = 0;
};

enum class Normalization { Global, PerImage };

/// Raw view of a 2-D FITS image.
RawImage to_raw(const fits::FitsImage& img);

/// ln(max(raw, 1)) / ln(max_dn), clamped to [0, 1]. max_dn must be >= 2
/// (ln 1 = 0 leaves the transform undefined). Throws BadMaxDn.
NormalizedImage normalize_intensity(const RawImage& raw, std::int64_t max_dn = kDefaultMaxDn,
                                    std::string source_id = {});

/// Same transform with the image's own maximum as ceiling. An image whose
/// maximum is <= 1 maps to all zeros.
NormalizedImage normalize_intensity_per_image(const RawImage& raw, std::string source_id = {});

/// Scalar form of the global transform.
double normalize_value(std::int64_t raw, std::int64_t max_dn = kDefaultMaxDn);

/// Block mean over factor x factor tiles. Throws NonDivisibleFactor.
NormalizedImage downsample_box(const NormalizedImage& img, std::size_t factor);

/// `count` square patches with origins uniform over valid positions.
/// Throws PatchTooLarge, BadArgs (count == 0 or size == 0).
std::vector<Patch> extract_patches(const NormalizedImage& img, std::size_t size, std::size_t count,
                                   std::uint64_t seed);

/// round(255 x), ties to even.
U8Image quantize_u8(const NormalizedImage& img);
std::uint8_t quantize_value(double x) noexcept;

/// Deterministic synthetic EUV-like sun: limb-brightened disc, dark holes,
/// bright arcs near the limb and seeded noise. Throws InvariantViolation.
NormalizedImage synth_sun(const SynthParams& params);

// ------------------------------------------------------------------ file I/O

/// HTIL tile: "HTIL", u32 width, u32 height, little-endian f32 row-major.
void write_htil(const std::string& path, const NormalizedImage& img);
NormalizedImage read_htil(const std::string& path);
std::vector<std::byte> encode_htil(const NormalizedImage& img);
NormalizedImage decode_htil(std::span<const std::byte> bytes);

/// 8-bit grayscale PNG.
void write_png(const std::string& path, const U8Image& img);
U8Image read_png(const std::string& path);

/// Loads every *.htil / *.png file in a directory (sorted by file name).
/// PNG pixels are mapped to v / 255.
std::vector<NormalizedImage> load_image_folder(const std::string& dir);

}  // namespace helio::imageprep
