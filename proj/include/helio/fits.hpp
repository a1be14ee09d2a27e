#pragma once

// Primary-HDU FITS reader/writer: 2880-byte blocks, 80-byte cards, big-endian
// payload, BZERO/BSCALE scaling to integer DN values.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace helio::fits {

inline constexpr std::size_t kBlockSize = 2880;
inline constexpr std::size_t kCardSize = 80;

/// Value of a header card. monostate marks commentary cards (COMMENT,
/// HISTORY, blank keyword, or any card without a value indicator) and
/// value cards with an empty value field.
using CardValue = std::variant<std::monostate, bool, std::int64_t, double, std::string>;

struct Card {
    std::string keyword;
    CardValue value;
    /// For value cards, the text after the "/" separator. For commentary
    /// cards, the full text from column 9.
    std::string comment;
    /// Value cards carry "= " in columns 9-10; commentary cards do not.
    bool has_value_indicator = true;

    friend bool operator==(const Card&, const Card&) = default;
};

/// Parsed primary HDU. `cards` holds every card except the structural ones
/// (SIMPLE, BITPIX, NAXIS, NAXISn), the scaling pair (BZERO, BSCALE) and END,
/// which live in the dedicated fields. `data` holds physical values
/// (bscale * raw + bzero), rounded half-to-even to integers, row-major with
/// naxes[0] as the fastest axis.
struct FitsImage {
    std::vector<Card> cards;
    int bitpix = 16;
    std::vector<std::int64_t> naxes;
    double bzero = 0.0;
    double bscale = 1.0;
    std::vector<std::int64_t> data;

    [[nodiscard]] std::size_t pixel_count() const noexcept;
    [[nodiscard]] std::size_t width() const noexcept;
    /// Product of all axes after the first (1 for one-dimensional data).
    [[nodiscard]] std::size_t height() const noexcept;

    [[nodiscard]] const Card* find(std::string_view keyword) const noexcept;

    friend bool operator==(const FitsImage&, const FitsImage&) = default;
};

struct QualityVerdict {
    static constexpr std::int64_t kMissing = -1;

    std::int64_t quality_flag = kMissing;
    bool accepted = false;
};

/// Parses the primary HDU. Trailing extension HDUs are skipped; a note is
/// appended to `warnings` when given.
/// Throws helio::Error (TruncatedFile, MalformedCard, UnsupportedBitpix).
FitsImage parse_fits(std::span<const std::byte> bytes, std::vector<std::string>* warnings = nullptr);

/// Serializes a primary HDU. Throws InvariantViolation when the image cannot
/// be represented exactly (shape mismatch, reserved keyword in `cards`, value
/// outside the BITPIX range after scaling, card text that would not survive a
/// re-parse).
std::vector<std::byte> write_fits(const FitsImage& img);

/// Accepts iff the keyword exists, holds an integral value and that value is 0.
QualityVerdict quality_filter(const FitsImage& img, std::string_view keyword = "QUALITY");

/// True for the keywords kept out of FitsImage::cards.
bool is_reserved_keyword(std::string_view keyword) noexcept;

/// Convenience constructor: 2-D image with the given BITPIX and scaling.
FitsImage make_image(int bitpix, std::size_t width, std::size_t height, std::vector<std::int64_t> data,
                     double bzero = 0.0, double bscale = 1.0);

std::vector<std::byte> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::byte> bytes);

}  // namespace helio::fits
