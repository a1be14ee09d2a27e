#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>

#include "helio/error.hpp"
#include "helio/fits.hpp"
#include "helio/imageprep.hpp"

namespace helio::imageprep {

namespace {

constexpr std::array<char, 4> kHtilMagic{'H', 'T', 'I', 'L'};

void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(std::span<const std::byte> b, std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | std::to_integer<std::uint32_t>(b[off + static_cast<std::size_t>(i)]);
    return v;
}

}  // namespace

std::vector<std::byte> encode_htil(const NormalizedImage& img) {
    if (img.data.size() != img.width * img.height) fail(ErrorKind::InvariantViolation, "image shape mismatch");
    if (img.width > 0xffffffffULL || img.height > 0xffffffffULL) fail(ErrorKind::InvariantViolation, "image too large");
    std::vector<std::byte> out;
    out.reserve(12 + 4 * img.data.size());
    for (char c : kHtilMagic) out.push_back(static_cast<std::byte>(c));
    put_u32(out, static_cast<std::uint32_t>(img.width));
    put_u32(out, static_cast<std::uint32_t>(img.height));
    for (double v : img.data) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    return out;
}

NormalizedImage decode_htil(std::span<const std::byte> bytes) {
    if (bytes.size() < 12 || !std::equal(kHtilMagic.begin(), kHtilMagic.end(), bytes.begin(),
                                         [](char c, std::byte b) { return static_cast<std::byte>(c) == b; })) {
        fail(ErrorKind::BadMagic, "not an HTIL tile");
    }
    NormalizedImage img;
    img.width = get_u32(bytes, 4);
    img.height = get_u32(bytes, 8);
    const std::size_t n = img.width * img.height;
    if (bytes.size() != 12 + 4 * n) fail(ErrorKind::CorruptLength, "HTIL payload size mismatch");
    img.data.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const float v = std::bit_cast<float>(get_u32(bytes, 12 + 4 * i));
        if (!std::isfinite(v)) fail(ErrorKind::NonFiniteValue, "non-finite HTIL pixel");
        img.data[i] = std::clamp(static_cast<double>(v), 0.0, 1.0);
    }
    return img;
}

void write_htil(const std::string& path, const NormalizedImage& img) { fits::write_file(path, encode_htil(img)); }

NormalizedImage read_htil(const std::string& path) {
    auto img = decode_htil(fits::read_file(path));
    img.source_id = std::filesystem::path(path).filename().string();
    return img;
}

void write_png(const std::string& path, const U8Image& img) {
    if (img.data.size() != img.width * img.height) fail(ErrorKind::InvariantViolation, "image shape mismatch");
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width);
    image.height = static_cast<png_uint_32>(img.height);
    image.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&image, path.c_str(), 0, img.data.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        fail(ErrorKind::IoFailure, "PNG write " + path + ": " + msg);
    }
}

U8Image read_png(const std::string& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str())) {
        fail(ErrorKind::IoFailure, "PNG read " + path + ": " + image.message);
    }
    image.format = PNG_FORMAT_GRAY;
    U8Image out{image.width, image.height, std::vector<std::uint8_t>(PNG_IMAGE_SIZE(image))};
    if (!png_image_finish_read(&image, nullptr, out.data.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        fail(ErrorKind::IoFailure, "PNG decode " + path + ": " + msg);
    }
    return out;
}

std::vector<NormalizedImage> load_image_folder(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) fail(ErrorKind::IoFailure, dir + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto ext = entry.path().extension().string();
        if (entry.is_regular_file() && (ext == ".htil" || ext == ".png")) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<NormalizedImage> out;
    out.reserve(files.size());
    for (const auto& f : files) {
        if (f.extension() == ".htil") {
            out.push_back(read_htil(f.string()));
        } else {
            const U8Image u8 = read_png(f.string());
            NormalizedImage img{u8.width, u8.height, std::vector<double>(u8.data.size()), f.filename().string()};
            std::transform(u8.data.begin(), u8.data.end(), img.data.begin(),
                           [](std::uint8_t v) { return static_cast<double>(v) / 255.0; });
            out.push_back(std::move(img));
        }
    }
    return out;
}

}  // namespace helio::imageprep
