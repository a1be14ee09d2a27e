#pragma once

// FEAT1 feature files.
//
// Layout (all integers little-endian):
//   "FEAT" 0x31 | u16 version = 1 | u16 id length | id bytes (UTF-8)
//   u32 dim | u64 count
//   count x { u16 sample-id length | sample-id bytes | dim x f32 }

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace helio::featstore {

inline constexpr std::uint16_t kVersion = 1;
inline constexpr std::size_t kInceptionPool3Dim = 2048;

struct FeatureSet {
    std::string extractor_id;
    std::size_t dim = 0;
    std::vector<float> rows;  // count * dim, row-major
    std::vector<std::string> sample_ids;

    [[nodiscard]] std::size_t count() const noexcept { return sample_ids.size(); }
    [[nodiscard]] std::span<const float> row(std::size_t i) const noexcept {
        return std::span<const float>(rows).subspan(i * dim, dim);
    }
    void push_back(std::string sample_id, std::span<const float> values);

    friend bool operator==(const FeatureSet&, const FeatureSet&) = default;
};

/// Checks every FeatureSet invariant. Throws InvariantViolation / NonFiniteValue.
void validate(const FeatureSet& fs);

/// Validates first, so nothing is written for an invalid set.
void write_features(const FeatureSet& fs, std::ostream& sink);
FeatureSet read_features(std::istream& source);

void save(const FeatureSet& fs, const std::string& path);
FeatureSet load(const std::string& path);

/// Stacks b under a. Throws ExtractorMismatch, DimMismatch, InvariantViolation.
FeatureSet concat(const FeatureSet& a, const FeatureSet& b);

struct FeatureHeader {
    std::string extractor_id;
    std::size_t dim = 0;
    std::uint64_t count = 0;
};

/// Incremental reader: header first, then one row at a time.
class FeatureReader {
public:
    explicit FeatureReader(std::istream& source);

    [[nodiscard]] const FeatureHeader& header() const noexcept { return header_; }
    [[nodiscard]] std::uint64_t remaining() const noexcept { return header_.count - consumed_; }

    /// Reads the next row into `values` (resized to dim) and returns its
    /// sample id, or nullopt once all rows have been consumed.
    std::optional<std::string> next(std::vector<float>& values);

private:
    std::istream& in_;
    FeatureHeader header_;
    std::uint64_t consumed_ = 0;
};

}  // namespace helio::featstore
