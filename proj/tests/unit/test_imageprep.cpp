#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <filesystem>
#include <random>

#include "../support/oracles.hpp"
#include "helio/error.hpp"
#include "helio/fits.hpp"
#include "helio/imageprep.hpp"

using namespace helio;
using namespace helio::imageprep;

namespace {

NormalizedImage image(std::size_t w, std::size_t h, std::vector<double> data) {
    NormalizedImage img;
    img.width = w;
    img.height = h;
    img.data = std::move(data);
    return img;
}

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected helio::Error");
    return ErrorKind::Usage;
}

std::filesystem::path temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("helio_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("intensity transform values") {
    CHECK(normalize_value(1) == 0.0);
    CHECK(normalize_value(0) == 0.0);
    CHECK(normalize_value(-5) == 0.0);
    CHECK(normalize_value(16383) == 1.0);
    CHECK(normalize_value(100000) == 1.0);
    CHECK(normalize_value(128) == doctest::Approx(std::log(128.0) / std::log(16383.0)).epsilon(1e-12));
    CHECK(std::abs(normalize_value(128) - 0.50002) < 1e-4);
    CHECK(normalize_value(255, 255) == 1.0);
    CHECK(kind_of([] { normalize_value(5, 1); }) == ErrorKind::BadMaxDn);
}

TEST_CASE("intensity transform is monotone") {
    std::mt19937_64 gen(1);
    std::uniform_int_distribution<std::int64_t> d(-100, 20000);
    for (int i = 0; i < 100000; ++i) {
        auto a = d(gen), b = d(gen);
        if (a > b) std::swap(a, b);
        REQUIRE(normalize_value(a) <= normalize_value(b));
    }
}

TEST_CASE("normalize whole images") {
    RawImage raw{2, 1, {1, 16383}};
    const auto n = normalize_intensity(raw, 16383, "x");
    CHECK(n.data == std::vector<double>{0.0, 1.0});
    CHECK(n.source_id == "x");
    RawImage r2{3, 1, {1, 10, 100}};
    const auto p = normalize_intensity_per_image(r2);
    CHECK(p.data.back() == 1.0);
    CHECK(p.data.front() == 0.0);
}

TEST_CASE("to_raw takes FITS dimensions") {
    const auto img = fits::make_image(16, 3, 2, {1, 2, 3, 4, 5, 6});
    const auto raw = to_raw(img);
    CHECK(raw.width == 3);
    CHECK(raw.height == 2);
    CHECK(raw.data == img.data);
}

TEST_CASE("box downsampling") {
    CHECK(downsample_box(image(2, 2, {0, 1, 1, 0}), 2).data == std::vector<double>{0.5});
    const auto c = downsample_box(image(4, 4, std::vector<double>(16, 0.3)), 2);
    for (double v : c.data) CHECK(v == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(kind_of([] { downsample_box(image(3, 3, std::vector<double>(9)), 2); }) == ErrorKind::NonDivisibleFactor);

    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<double> big(256 * 256);
    for (auto& v : big) v = u(gen);
    const auto got = downsample_box(image(256, 256, big), 4);
    const auto want = oracle::naive_downsample(big, 256, 256, 4);
    REQUIRE(got.data.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) REQUIRE(got.data[i] == doctest::Approx(want[i]).epsilon(1e-14));
}

TEST_CASE("patch extraction") {
    const auto img = image(8, 8, std::vector<double>(64, 0.25));
    const auto full = extract_patches(img, 8, 3, 5);
    for (const auto& p : full) {
        CHECK(p.row == 0);
        CHECK(p.col == 0);
        CHECK(p.data == img.data);
    }
    const auto a = extract_patches(img, 3, 20, 11);
    const auto b = extract_patches(img, 3, 20, 11);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].row == b[i].row);
        CHECK(a[i].col == b[i].col);
    }
    CHECK(kind_of([&] { extract_patches(img, 9, 1, 0); }) == ErrorKind::PatchTooLarge);
    CHECK(kind_of([&] { extract_patches(img, 0, 1, 0); }) == ErrorKind::BadArgs);
}

TEST_CASE("patch origins are uniform (chi-squared)") {
    // Origins on a 1024^2 image with 64^2 patches: 961 positions per axis.
    // Bin each axis into 31 equal groups of 31 positions.
    NormalizedImage img = image(1024, 1024, std::vector<double>(1024 * 1024, 0.0));
    const auto patches = extract_patches(img, 64, 10000, 42);
    std::vector<double> rows(31), cols(31);
    for (const auto& p : patches) {
        rows[p.row / 31] += 1;
        cols[p.col / 31] += 1;
    }
    const double expected = 10000.0 / 31.0;
    double chi_r = 0, chi_c = 0;
    for (int i = 0; i < 31; ++i) {
        chi_r += (rows[i] - expected) * (rows[i] - expected) / expected;
        chi_c += (cols[i] - expected) * (cols[i] - expected) / expected;
    }
    const double crit = boost::math::quantile(boost::math::chi_squared(30), 0.99);
    CHECK(chi_r < crit);
    CHECK(chi_c < crit);
}

TEST_CASE("quantization") {
    CHECK(quantize_value(0.0) == 0);
    CHECK(quantize_value(1.0) == 255);
    CHECK(quantize_value(0.5) == 128);
    CHECK(quantize_value(-1.0) == 0);
    CHECK(quantize_value(2.0) == 255);
    const auto q = quantize_u8(image(2, 1, {0.0, 1.0}));
    CHECK(q.data == std::vector<std::uint8_t>{0, 255});
}

TEST_CASE("synthetic sun") {
    SynthParams p;
    p.resolution = 64;
    const auto a = synth_sun(p);
    CHECK(a.width == 64);
    CHECK(a.height == 64);
    for (double v : a.data) {
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0);
    }
    SUBCASE("clean disc is invariant under 90 degree rotation") {
        for (std::size_t r = 0; r < 64; ++r)
            for (std::size_t c = 0; c < 64; ++c) REQUIRE(a.at(r, c) == doctest::Approx(a.at(c, 63 - r)).epsilon(1e-12));
    }
    SUBCASE("deterministic") {
        p.loop_density = 3;
        p.hole_count = 2;
        p.noise_scale = 0.05;
        p.seed = 9;
        CHECK(synth_sun(p) == synth_sun(p));
        auto q = p;
        q.seed = 10;
        CHECK_FALSE(synth_sun(q) == synth_sun(p));
    }
}

TEST_CASE("HTIL codec") {
    const auto img = image(3, 2, {0.0, 0.25, 0.5, 0.75, 1.0, 0.125});
    const auto bytes = encode_htil(img);
    CHECK(bytes.size() == 12 + 6 * 4);
    const auto back = decode_htil(bytes);
    CHECK(back.width == 3);
    CHECK(back.data == img.data);

    auto bad = bytes;
    bad[0] = std::byte{'X'};
    CHECK(kind_of([&] { decode_htil(bad); }) == ErrorKind::BadMagic);
    CHECK(kind_of([&] { decode_htil(std::span(bytes).first(bytes.size() - 1)); }) == ErrorKind::CorruptLength);
    auto nan = bytes;
    nan[12] = nan[13] = std::byte{0xff};
    nan[14] = nan[15] = std::byte{0xff};
    CHECK(kind_of([&] { decode_htil(nan); }) == ErrorKind::NonFiniteValue);
}

TEST_CASE("PNG and folder loading") {
    const auto dir = temp_dir("png");
    U8Image img{4, 2, {0, 64, 128, 255, 1, 2, 3, 4}};
    write_png((dir / "b.png").string(), img);
    CHECK(read_png((dir / "b.png").string()) == img);
    write_htil((dir / "a.htil").string(), image(1, 1, {0.5}));
    const auto all = load_image_folder(dir.string());
    REQUIRE(all.size() == 2);
    CHECK(all[0].data == std::vector<double>{0.5});
    CHECK(all[1].data[3] == 1.0);
    CHECK(all[1].data[1] == doctest::Approx(64.0 / 255.0));
}
