#include "helio/fits.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "helio/error.hpp"

namespace helio::fits {

namespace {

constexpr std::size_t kCardsPerBlock = kBlockSize / kCardSize;

bool is_commentary_keyword(std::string_view kw) noexcept {
    return kw.empty() || kw == "COMMENT" || kw == "HISTORY";
}

std::string_view rtrim(std::string_view s) noexcept {
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    return s;
}

std::string_view ltrim(std::string_view s) noexcept {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    return s;
}

bool printable(std::string_view s) noexcept {
    return std::all_of(s.begin(), s.end(), [](char c) { return c >= 0x20 && c <= 0x7e; });
}

bool valid_bitpix(int bitpix) noexcept {
    return bitpix == 8 || bitpix == 16 || bitpix == 32 || bitpix == 64 || bitpix == -32 || bitpix == -64;
}

std::size_t bytes_per_pixel(int bitpix) noexcept { return static_cast<std::size_t>(std::abs(bitpix)) / 8; }

// ---------------------------------------------------------------- card parse

std::optional<double> parse_real(std::string_view token) {
    std::string buf(token);
    if (!buf.empty() && buf.front() == '+') buf.erase(0, 1);
    std::replace(buf.begin(), buf.end(), 'D', 'E');
    std::replace(buf.begin(), buf.end(), 'd', 'e');
    if (buf.empty()) return std::nullopt;
    // from_chars accepts "inf"/"nan", which FITS does not.
    if (std::any_of(buf.begin(), buf.end(), [](char c) { return std::isalpha(static_cast<unsigned char>(c)) && c != 'E' && c != 'e'; })) {
        return std::nullopt;
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{} || ptr != buf.data() + buf.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

bool is_integer_token(std::string_view token) noexcept {
    if (!token.empty() && (token.front() == '+' || token.front() == '-')) token.remove_prefix(1);
    return !token.empty() && std::all_of(token.begin(), token.end(), [](char c) { return c >= '0' && c <= '9'; });
}

Card parse_card(std::string_view rec) {
    if (!printable(rec)) fail(ErrorKind::MalformedCard, "card contains non-ASCII or control bytes");
    Card card;
    card.keyword = std::string(rtrim(rec.substr(0, 8)));
    if (card.keyword.find(' ') != std::string::npos) {
        fail(ErrorKind::MalformedCard, "embedded space in keyword '" + card.keyword + "'");
    }
    const bool indicator = rec.substr(8, 2) == "= ";
    if (is_commentary_keyword(card.keyword) || !indicator) {
        card.has_value_indicator = false;
        card.comment = std::string(rtrim(rec.substr(8)));
        return card;
    }

    std::string_view field = ltrim(rec.substr(10));
    auto take_comment = [&](std::string_view rest) {
        rest = ltrim(rest);
        if (rest.empty()) return;
        if (rest.front() != '/') fail(ErrorKind::MalformedCard, "unexpected text after value of " + card.keyword);
        rest.remove_prefix(1);
        if (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
        card.comment = std::string(rtrim(rest));
    };

    if (field.empty() || field.front() == '/') {
        take_comment(field);
        return card;
    }
    if (field.front() == '\'') {
        std::string text;
        std::size_t i = 1;
        bool closed = false;
        while (i < field.size()) {
            if (field[i] == '\'') {
                if (i + 1 < field.size() && field[i + 1] == '\'') {
                    text.push_back('\'');
                    i += 2;
                    continue;
                }
                closed = true;
                ++i;
                break;
            }
            text.push_back(field[i++]);
        }
        if (!closed) fail(ErrorKind::MalformedCard, "unterminated string in " + card.keyword);
        card.value = std::string(rtrim(text));
        take_comment(field.substr(i));
        return card;
    }

    const std::size_t slash = field.find('/');
    const std::string_view token = rtrim(field.substr(0, slash));
    if (slash != std::string_view::npos) take_comment(field.substr(slash));

    if (token == "T") {
        card.value = true;
    } else if (token == "F") {
        card.value = false;
    } else if (is_integer_token(token)) {
        std::string_view digits = token;
        if (digits.front() == '+') digits.remove_prefix(1);
        std::int64_t v = 0;
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
        if (ec == std::errc{} && ptr == digits.data() + digits.size()) {
            card.value = v;
        } else if (auto r = parse_real(token)) {
            card.value = *r;  // integer wider than 64 bits
        } else {
            fail(ErrorKind::MalformedCard, "bad integer in " + card.keyword);
        }
    } else if (auto r = parse_real(token)) {
        card.value = *r;
    } else {
        fail(ErrorKind::MalformedCard, "unparseable value '" + std::string(token) + "' in " + card.keyword);
    }
    return card;
}

std::optional<double> numeric(const CardValue& v) noexcept {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    if (const auto* d = std::get_if<double>(&v)) return *d;
    return std::nullopt;
}

std::optional<std::int64_t> integral(const CardValue& v) noexcept {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
    if (const auto* d = std::get_if<double>(&v)) {
        if (std::isfinite(*d) && std::trunc(*d) == *d && std::abs(*d) < 0x1p62) return static_cast<std::int64_t>(*d);
    }
    return std::nullopt;
}

// ---------------------------------------------------------------- pixel codec

template <typename T>
T load_be(const std::byte* p) noexcept {
    std::array<std::byte, sizeof(T)> buf;
    std::memcpy(buf.data(), p, sizeof(T));
    if constexpr (std::endian::native == std::endian::little) std::reverse(buf.begin(), buf.end());
    return std::bit_cast<T>(buf);
}

template <typename T>
void store_be(std::byte* p, T value) noexcept {
    auto buf = std::bit_cast<std::array<std::byte, sizeof(T)>>(value);
    if constexpr (std::endian::native == std::endian::little) std::reverse(buf.begin(), buf.end());
    std::memcpy(p, buf.data(), sizeof(T));
}

/// Raw stored sample, widened. Integers stay exact; floats stay floats.
struct RawSample {
    bool is_float = false;
    std::int64_t i = 0;
    double f = 0.0;
};

RawSample load_raw(int bitpix, const std::byte* p) noexcept {
    switch (bitpix) {
        case 8: return {false, std::to_integer<std::uint8_t>(p[0]), 0.0};
        case 16: return {false, load_be<std::int16_t>(p), 0.0};
        case 32: return {false, load_be<std::int32_t>(p), 0.0};
        case 64: return {false, load_be<std::int64_t>(p), 0.0};
        case -32: return {true, 0, static_cast<double>(load_be<float>(p))};
        default: return {true, 0, load_be<double>(p)};
    }
}

bool integer_shift_only(double bzero, double bscale) noexcept {
    return bscale == 1.0 && std::trunc(bzero) == bzero && std::abs(bzero) <= 0x1p62;
}

/// Physical DN for one stored sample; nullopt when not representable.
std::optional<std::int64_t> decode(const RawSample& raw, double bzero, double bscale) noexcept {
    if (!raw.is_float && integer_shift_only(bzero, bscale)) {
        std::int64_t out = 0;
        if (__builtin_add_overflow(raw.i, static_cast<std::int64_t>(bzero), &out)) return std::nullopt;
        return out;
    }
    const double x = raw.is_float ? raw.f : static_cast<double>(raw.i);
    const double phys = std::nearbyint(bscale * x + bzero);
    if (!std::isfinite(phys) || std::abs(phys) >= 0x1p63) return std::nullopt;
    return static_cast<std::int64_t>(phys);
}

std::int64_t int_min(int bitpix) noexcept {
    switch (bitpix) {
        case 8: return 0;
        case 16: return std::numeric_limits<std::int16_t>::min();
        case 32: return std::numeric_limits<std::int32_t>::min();
        default: return std::numeric_limits<std::int64_t>::min();
    }
}

std::int64_t int_max(int bitpix) noexcept {
    switch (bitpix) {
        case 8: return 255;
        case 16: return std::numeric_limits<std::int16_t>::max();
        case 32: return std::numeric_limits<std::int32_t>::max();
        default: return std::numeric_limits<std::int64_t>::max();
    }
}

/// Stored sample for a physical value, or nullopt when it cannot be encoded
/// so that decode() gives the value back.
std::optional<RawSample> encode(int bitpix, std::int64_t phys, double bzero, double bscale) noexcept {
    RawSample raw;
    if (bitpix > 0) {
        if (integer_shift_only(bzero, bscale)) {
            if (__builtin_sub_overflow(phys, static_cast<std::int64_t>(bzero), &raw.i)) return std::nullopt;
        } else {
            const double r = std::nearbyint((static_cast<double>(phys) - bzero) / bscale);
            if (!std::isfinite(r) || std::abs(r) >= 0x1p63) return std::nullopt;
            raw.i = static_cast<std::int64_t>(r);
        }
        if (raw.i < int_min(bitpix) || raw.i > int_max(bitpix)) return std::nullopt;
    } else {
        raw.is_float = true;
        raw.f = (static_cast<double>(phys) - bzero) / bscale;
        if (bitpix == -32) raw.f = static_cast<double>(static_cast<float>(raw.f));
    }
    const auto back = decode(raw, bzero, bscale);
    if (!back || *back != phys) return std::nullopt;
    return raw;
}

void store_raw(int bitpix, std::byte* p, const RawSample& raw) noexcept {
    switch (bitpix) {
        case 8: p[0] = static_cast<std::byte>(raw.i); break;
        case 16: store_be(p, static_cast<std::int16_t>(raw.i)); break;
        case 32: store_be(p, static_cast<std::int32_t>(raw.i)); break;
        case 64: store_be(p, raw.i); break;
        case -32: store_be(p, static_cast<float>(raw.f)); break;
        default: store_be(p, raw.f); break;
    }
}

// ---------------------------------------------------------------- card write

std::string format_real(double v) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    std::string s(buf.data(), ptr);
    std::replace(s.begin(), s.end(), 'e', 'E');
    if (s.find('.') == std::string::npos && s.find('E') == std::string::npos) s += ".0";
    return s;
}

std::string right_justify(const std::string& s, std::size_t width = 20) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

void check_text(const std::string& text, const std::string& what) {
    if (!printable(text)) fail(ErrorKind::InvariantViolation, what + " is not printable ASCII");
    if (!text.empty() && text.back() == ' ') fail(ErrorKind::InvariantViolation, what + " has trailing blanks");
}

std::string format_card(const Card& card) {
    const std::string& kw = card.keyword;
    if (kw.size() > 8 || !std::all_of(kw.begin(), kw.end(), [](char c) {
            return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
        })) {
        fail(ErrorKind::InvariantViolation, "keyword '" + kw + "' is not a valid FITS keyword");
    }
    check_text(card.comment, "comment of " + kw);

    std::string out = kw;
    out.resize(8, ' ');
    if (!card.has_value_indicator) {
        if (!std::holds_alternative<std::monostate>(card.value)) {
            fail(ErrorKind::InvariantViolation, "commentary card " + kw + " carries a value");
        }
        if (!is_commentary_keyword(kw) && (card.comment.starts_with("= ") || card.comment == "=")) {
            fail(ErrorKind::InvariantViolation, "commentary text of " + kw + " would read back as a value");
        }
        out += card.comment;
    } else {
        if (is_commentary_keyword(kw)) fail(ErrorKind::InvariantViolation, "keyword '" + kw + "' cannot carry a value");
        out += "= ";
        out += std::visit(
            [&](const auto& v) -> std::string {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, std::monostate>) {
                    return std::string(20, ' ');
                } else if constexpr (std::is_same_v<T, bool>) {
                    return right_justify(v ? "T" : "F");
                } else if constexpr (std::is_same_v<T, std::int64_t>) {
                    return right_justify(std::to_string(v));
                } else if constexpr (std::is_same_v<T, double>) {
                    if (!std::isfinite(v)) fail(ErrorKind::InvariantViolation, "non-finite value in " + kw);
                    return right_justify(format_real(v));
                } else {
                    check_text(v, "string value of " + kw);
                    std::string quoted = "'";
                    for (char c : v) {
                        quoted.push_back(c);
                        if (c == '\'') quoted.push_back('\'');
                    }
                    while (quoted.size() < 9) quoted.push_back(' ');
                    quoted.push_back('\'');
                    return quoted;
                }
            },
            card.value);
        if (!card.comment.empty()) out += " / " + card.comment;
    }
    if (out.size() > kCardSize) fail(ErrorKind::InvariantViolation, "card " + kw + " exceeds 80 columns");
    out.resize(kCardSize, ' ');
    return out;
}

Card value_card(std::string keyword, CardValue value) {
    Card c;
    c.keyword = std::move(keyword);
    c.value = std::move(value);
    return c;
}

CardValue scaling_value(double v) {
    if (std::trunc(v) == v && std::abs(v) < 0x1p53) return static_cast<std::int64_t>(v);
    return v;
}

std::size_t checked_product(std::span<const std::int64_t> axes, std::size_t limit) {
    std::size_t n = 1;
    for (auto a : axes) {
        const auto ua = static_cast<std::size_t>(a);
        if (ua != 0 && n > limit / ua) return limit + 1;
        n *= ua;
    }
    return n;
}

}  // namespace

bool is_reserved_keyword(std::string_view kw) noexcept {
    if (kw == "SIMPLE" || kw == "BITPIX" || kw == "NAXIS" || kw == "BZERO" || kw == "BSCALE" || kw == "END") return true;
    if (kw.starts_with("NAXIS") && kw.size() > 5) {
        return std::all_of(kw.begin() + 5, kw.end(), [](char c) { return c >= '0' && c <= '9'; });
    }
    return false;
}

std::size_t FitsImage::pixel_count() const noexcept {
    if (naxes.empty()) return 0;
    std::size_t n = 1;
    for (auto a : naxes) n *= static_cast<std::size_t>(a);
    return n;
}

std::size_t FitsImage::width() const noexcept { return naxes.empty() ? 0 : static_cast<std::size_t>(naxes[0]); }

std::size_t FitsImage::height() const noexcept {
    if (naxes.empty()) return 0;
    std::size_t h = 1;
    for (std::size_t i = 1; i < naxes.size(); ++i) h *= static_cast<std::size_t>(naxes[i]);
    return h;
}

const Card* FitsImage::find(std::string_view keyword) const noexcept {
    for (const auto& c : cards) {
        if (c.keyword == keyword && c.has_value_indicator) return &c;
    }
    return nullptr;
}

FitsImage parse_fits(std::span<const std::byte> bytes, std::vector<std::string>* warnings) {
    if (bytes.empty() || bytes.size() % kBlockSize != 0) {
        fail(ErrorKind::TruncatedFile, "size " + std::to_string(bytes.size()) + " is not a positive multiple of 2880");
    }

    std::vector<Card> all;
    std::size_t header_cards = 0;
    bool found_end = false;
    for (std::size_t off = 0; off + kCardSize <= bytes.size(); off += kCardSize) {
        const std::string_view rec(reinterpret_cast<const char*>(bytes.data() + off), kCardSize);
        ++header_cards;
        if (rtrim(rec.substr(0, 8)) == "END" && printable(rec)) {
            if (!rtrim(rec.substr(8)).empty()) fail(ErrorKind::MalformedCard, "END card has trailing text");
            found_end = true;
            break;
        }
        all.push_back(parse_card(rec));
    }
    if (!found_end) fail(ErrorKind::TruncatedFile, "no END card");
    const std::size_t header_bytes = (header_cards + kCardsPerBlock - 1) / kCardsPerBlock * kBlockSize;

    if (all.empty() || all.front().keyword != "SIMPLE") fail(ErrorKind::MalformedCard, "first card is not SIMPLE");

    auto lookup = [&](std::string_view kw) -> const Card* {
        for (const auto& c : all) {
            if (c.keyword == kw && c.has_value_indicator) return &c;
        }
        return nullptr;
    };
    auto required_int = [&](std::string_view kw) -> std::int64_t {
        const Card* c = lookup(kw);
        if (!c) fail(ErrorKind::MalformedCard, "missing " + std::string(kw));
        const auto* v = std::get_if<std::int64_t>(&c->value);
        if (!v) fail(ErrorKind::MalformedCard, std::string(kw) + " is not an integer");
        return *v;
    };

    FitsImage img;
    const std::int64_t bitpix = required_int("BITPIX");
    if (!valid_bitpix(static_cast<int>(bitpix)) || bitpix != static_cast<int>(bitpix)) {
        fail(ErrorKind::UnsupportedBitpix, "BITPIX " + std::to_string(bitpix));
    }
    img.bitpix = static_cast<int>(bitpix);
    const std::int64_t naxis = required_int("NAXIS");
    if (naxis < 0 || naxis > 999) fail(ErrorKind::MalformedCard, "NAXIS out of range");
    for (std::int64_t i = 1; i <= naxis; ++i) {
        const std::int64_t len = required_int("NAXIS" + std::to_string(i));
        if (len < 0) fail(ErrorKind::MalformedCard, "negative axis length");
        img.naxes.push_back(len);
    }
    for (const char* kw : {"BZERO", "BSCALE"}) {
        if (const Card* c = lookup(kw)) {
            const auto v = numeric(c->value);
            if (!v || !std::isfinite(*v)) fail(ErrorKind::MalformedCard, std::string(kw) + " is not numeric");
            (std::string_view(kw) == "BZERO" ? img.bzero : img.bscale) = *v;
        }
    }
    if (img.bscale == 0.0) fail(ErrorKind::MalformedCard, "BSCALE is zero");

    for (auto& c : all) {
        if (!(c.has_value_indicator && is_reserved_keyword(c.keyword))) img.cards.push_back(std::move(c));
    }

    const std::size_t bpp = bytes_per_pixel(img.bitpix);
    const std::size_t available = bytes.size() - header_bytes;
    const std::size_t pixels = img.naxes.empty() ? 0 : checked_product(img.naxes, available / bpp);
    if (pixels > available / bpp) fail(ErrorKind::TruncatedFile, "data shorter than NAXIS product");

    img.data.resize(pixels);
    const std::byte* payload = bytes.data() + header_bytes;
    for (std::size_t i = 0; i < pixels; ++i) {
        const auto phys = decode(load_raw(img.bitpix, payload + i * bpp), img.bzero, img.bscale);
        if (!phys) fail(ErrorKind::InvariantViolation, "pixel " + std::to_string(i) + " has no integer DN value");
        img.data[i] = *phys;
    }

    const std::size_t data_bytes = (pixels * bpp + kBlockSize - 1) / kBlockSize * kBlockSize;
    if (header_bytes + data_bytes < bytes.size() && warnings) {
        warnings->push_back("skipped " + std::to_string(bytes.size() - header_bytes - data_bytes) +
                            " bytes of extension HDUs");
    }
    return img;
}

std::vector<std::byte> write_fits(const FitsImage& img) {
    if (!valid_bitpix(img.bitpix)) fail(ErrorKind::InvariantViolation, "BITPIX " + std::to_string(img.bitpix));
    if (img.naxes.size() > 999) fail(ErrorKind::InvariantViolation, "too many axes");
    if (std::any_of(img.naxes.begin(), img.naxes.end(), [](auto a) { return a < 0; })) {
        fail(ErrorKind::InvariantViolation, "negative axis length");
    }
    if (img.pixel_count() != img.data.size()) fail(ErrorKind::InvariantViolation, "data size does not match axes");
    if (!std::isfinite(img.bzero) || !std::isfinite(img.bscale) || img.bscale == 0.0) {
        fail(ErrorKind::InvariantViolation, "bad BZERO/BSCALE");
    }

    std::string header;
    header += format_card(value_card("SIMPLE", true));
    header += format_card(value_card("BITPIX", std::int64_t{img.bitpix}));
    header += format_card(value_card("NAXIS", static_cast<std::int64_t>(img.naxes.size())));
    for (std::size_t i = 0; i < img.naxes.size(); ++i) {
        header += format_card(value_card("NAXIS" + std::to_string(i + 1), img.naxes[i]));
    }
    if (img.bzero != 0.0) header += format_card(value_card("BZERO", scaling_value(img.bzero)));
    if (img.bscale != 1.0) header += format_card(value_card("BSCALE", scaling_value(img.bscale)));
    for (const auto& c : img.cards) {
        if (c.has_value_indicator && is_reserved_keyword(c.keyword)) {
            fail(ErrorKind::InvariantViolation, "reserved keyword " + c.keyword + " in card list");
        }
        if (c.keyword == "END") fail(ErrorKind::InvariantViolation, "END in card list");
        header += format_card(c);
    }
    header += format_card(Card{"END", std::monostate{}, "", false});
    header.resize((header.size() + kBlockSize - 1) / kBlockSize * kBlockSize, ' ');

    const std::size_t bpp = bytes_per_pixel(img.bitpix);
    const std::size_t data_bytes = (img.data.size() * bpp + kBlockSize - 1) / kBlockSize * kBlockSize;
    std::vector<std::byte> out(header.size() + data_bytes, std::byte{0});
    std::memcpy(out.data(), header.data(), header.size());
    std::byte* payload = out.data() + header.size();
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        const auto raw = encode(img.bitpix, img.data[i], img.bzero, img.bscale);
        if (!raw) {
            fail(ErrorKind::InvariantViolation,
                 "value " + std::to_string(img.data[i]) + " not representable with BITPIX " + std::to_string(img.bitpix));
        }
        store_raw(img.bitpix, payload + i * bpp, *raw);
    }
    return out;
}

QualityVerdict quality_filter(const FitsImage& img, std::string_view keyword) {
    QualityVerdict verdict;
    const Card* card = img.find(keyword);
    if (!card) return verdict;
    if (const auto v = integral(card->value)) {
        verdict.quality_flag = *v;
        verdict.accepted = *v == 0;
    }
    return verdict;
}

FitsImage make_image(int bitpix, std::size_t width, std::size_t height, std::vector<std::int64_t> data,
                     double bzero, double bscale) {
    FitsImage img;
    img.bitpix = bitpix;
    img.naxes = {static_cast<std::int64_t>(width), static_cast<std::int64_t>(height)};
    img.bzero = bzero;
    img.bscale = bscale;
    img.data = std::move(data);
    return img;
}

std::vector<std::byte> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::IoFailure, "cannot open " + path);
    std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<std::byte> out(raw.size());
    std::memcpy(out.data(), raw.data(), raw.size());
    return out;
}

void write_file(const std::string& path, std::span<const std::byte> bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::IoFailure, "cannot create " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorKind::IoFailure, "write failed for " + path);
}

}  // namespace helio::fits
