#include "helio/featstore.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>

#include "helio/error.hpp"

namespace helio::featstore {

namespace {

constexpr std::array<char, 5> kMagic{'F', 'E', 'A', 'T', 0x31};

template <typename T>
void put_le(std::ostream& out, T v) {
    std::array<char, sizeof(T)> buf{};
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff);
    out.write(buf.data(), buf.size());
}

void read_exact(std::istream& in, char* dst, std::size_t n, const char* what) {
    in.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) fail(ErrorKind::CorruptLength, std::string("stream ends inside ") + what);
}

template <typename T>
T get_le(std::istream& in, const char* what) {
    std::array<unsigned char, sizeof(T)> buf{};
    read_exact(in, reinterpret_cast<char*>(buf.data()), buf.size(), what);
    std::uint64_t v = 0;
    for (std::size_t i = sizeof(T); i-- > 0;) v = (v << 8) | buf[i];
    return static_cast<T>(v);
}

void put_string(std::ostream& out, const std::string& s) {
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in, const char* what) {
    const auto len = get_le<std::uint16_t>(in, what);
    std::string s(len, '\0');
    read_exact(in, s.data(), len, what);
    return s;
}

}  // namespace

void FeatureSet::push_back(std::string sample_id, std::span<const float> values) {
    if (values.size() != dim) {
        fail(ErrorKind::InvariantViolation,
             "row length " + std::to_string(values.size()) + " differs from dim " + std::to_string(dim));
    }
    rows.insert(rows.end(), values.begin(), values.end());
    sample_ids.push_back(std::move(sample_id));
}

void validate(const FeatureSet& fs) {
    if (fs.sample_ids.empty()) fail(ErrorKind::InvariantViolation, "feature set is empty");
    if (fs.dim == 0 || fs.dim > std::numeric_limits<std::uint32_t>::max()) {
        fail(ErrorKind::InvariantViolation, "dim out of range");
    }
    if (fs.rows.size() != fs.count() * fs.dim) {
        fail(ErrorKind::InvariantViolation, "row storage (" + std::to_string(fs.rows.size()) + " values) does not match " +
                                                std::to_string(fs.count()) + " x " + std::to_string(fs.dim));
    }
    if (fs.extractor_id.size() > std::numeric_limits<std::uint16_t>::max()) {
        fail(ErrorKind::InvariantViolation, "extractor id too long");
    }
    if (fs.extractor_id == "inception-v3-pool3" && fs.dim != kInceptionPool3Dim) {
        fail(ErrorKind::InvariantViolation, "inception-v3-pool3 features must have dim 2048");
    }
    for (const auto& id : fs.sample_ids) {
        if (id.size() > std::numeric_limits<std::uint16_t>::max()) fail(ErrorKind::InvariantViolation, "sample id too long");
    }
    if (!std::all_of(fs.rows.begin(), fs.rows.end(), [](float v) { return std::isfinite(v); })) {
        fail(ErrorKind::NonFiniteValue, "feature rows contain NaN or infinity");
    }
}

void write_features(const FeatureSet& fs, std::ostream& sink) {
    validate(fs);
    sink.write(kMagic.data(), kMagic.size());
    put_le<std::uint16_t>(sink, kVersion);
    put_string(sink, fs.extractor_id);
    put_le<std::uint32_t>(sink, static_cast<std::uint32_t>(fs.dim));
    put_le<std::uint64_t>(sink, fs.count());
    for (std::size_t i = 0; i < fs.count(); ++i) {
        put_string(sink, fs.sample_ids[i]);
        for (float v : fs.row(i)) put_le<std::uint32_t>(sink, std::bit_cast<std::uint32_t>(v));
    }
    if (!sink) fail(ErrorKind::IoFailure, "feature stream write failed");
}

FeatureReader::FeatureReader(std::istream& source) : in_(source) {
    std::array<char, 5> magic{};
    in_.read(magic.data(), magic.size());
    if (in_.gcount() != static_cast<std::streamsize>(magic.size()) || magic != kMagic) {
        fail(ErrorKind::BadMagic, "not a FEAT1 stream");
    }
    const auto version = get_le<std::uint16_t>(in_, "header");
    if (version != kVersion) fail(ErrorKind::BadMagic, "unsupported FEAT version " + std::to_string(version));
    header_.extractor_id = get_string(in_, "extractor id");
    header_.dim = get_le<std::uint32_t>(in_, "header");
    header_.count = get_le<std::uint64_t>(in_, "header");
    if (header_.dim == 0) fail(ErrorKind::CorruptLength, "dim is zero");
    if (header_.count == 0) fail(ErrorKind::CorruptLength, "count is zero");
}

std::optional<std::string> FeatureReader::next(std::vector<float>& values) {
    if (consumed_ == header_.count) return std::nullopt;
    std::string id = get_string(in_, "sample id");
    values.resize(header_.dim);
    std::vector<unsigned char> buf(4 * header_.dim);
    read_exact(in_, reinterpret_cast<char*>(buf.data()), buf.size(), "feature row");
    for (std::size_t j = 0; j < header_.dim; ++j) {
        const std::uint32_t bits = std::uint32_t{buf[4 * j]} | (std::uint32_t{buf[4 * j + 1]} << 8) |
                                   (std::uint32_t{buf[4 * j + 2]} << 16) | (std::uint32_t{buf[4 * j + 3]} << 24);
        values[j] = std::bit_cast<float>(bits);
        if (!std::isfinite(values[j])) {
            fail(ErrorKind::NonFiniteValue, "row " + std::to_string(consumed_) + " (" + id + ") is not finite");
        }
    }
    ++consumed_;
    return id;
}

FeatureSet read_features(std::istream& source) {
    FeatureReader reader(source);
    FeatureSet fs;
    fs.extractor_id = reader.header().extractor_id;
    fs.dim = reader.header().dim;
    // The count field is untrusted; grow as rows actually arrive.
    const auto hint = std::min<std::uint64_t>(reader.header().count, 1 << 16);
    fs.sample_ids.reserve(hint);
    std::vector<float> row;
    while (auto id = reader.next(row)) fs.push_back(std::move(*id), row);
    validate(fs);
    return fs;
}

void save(const FeatureSet& fs, const std::string& path) {
    validate(fs);
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::IoFailure, "cannot create " + path);
    write_features(fs, out);
}

FeatureSet load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::IoFailure, "cannot open " + path);
    return read_features(in);
}

FeatureSet concat(const FeatureSet& a, const FeatureSet& b) {
    if (a.extractor_id != b.extractor_id) {
        fail(ErrorKind::ExtractorMismatch, "'" + a.extractor_id + "' vs '" + b.extractor_id + "'");
    }
    if (a.dim != b.dim) fail(ErrorKind::DimMismatch, std::to_string(a.dim) + " vs " + std::to_string(b.dim));
    validate(a);
    validate(b);
    FeatureSet out = a;
    out.rows.insert(out.rows.end(), b.rows.begin(), b.rows.end());
    out.sample_ids.insert(out.sample_ids.end(), b.sample_ids.begin(), b.sample_ids.end());
    return out;
}

}  // namespace helio::featstore
