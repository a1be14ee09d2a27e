#include <doctest.h>

#include <random>
#include <sstream>

#include "../support/oracles.hpp"
#include "helio/error.hpp"
#include "helio/metrics.hpp"
#include "helio/records.hpp"

using namespace helio;
using namespace helio::metrics;
using featstore::FeatureSet;

namespace {

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected helio::Error");
    return ErrorKind::Usage;
}

FeatureSet from_rows(const oracle::Rows& rows, std::string id = "x") {
    FeatureSet fs;
    fs.extractor_id = std::move(id);
    fs.dim = rows.front().size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::vector<float> f(rows[i].begin(), rows[i].end());
        fs.push_back(std::to_string(i), f);
    }
    return fs;
}

// Rows rounded through float so the oracle sees exactly what the library sees.
oracle::Rows random_rows(std::size_t n, std::size_t d, std::mt19937_64& gen, double shift = 0.0) {
    std::normal_distribution<double> nd;
    oracle::Rows rows(n, std::vector<double>(d));
    for (auto& r : rows)
        for (auto& v : r) v = static_cast<float>(nd(gen) + shift);
    return rows;
}

GaussianStats stats1d(double mean, double var) {
    GaussianStats s;
    s.mean = Eigen::VectorXd::Constant(1, mean);
    s.cov = Eigen::MatrixXd::Constant(1, 1, var);
    s.n = 2;
    return s;
}

imageprep::NormalizedImage img(std::size_t w, std::vector<double> data, std::string id) {
    imageprep::NormalizedImage m;
    m.width = m.height = w;
    m.data = std::move(data);
    m.source_id = std::move(id);
    return m;
}

}  // namespace

TEST_CASE("gaussian statistics") {
    const auto s = gaussian_stats(from_rows({{0.0}, {2.0}}));
    CHECK(s.mean[0] == 1.0);
    CHECK(s.cov(0, 0) == 2.0);
    const auto z = gaussian_stats(from_rows({{1, 2, 3}, {1, 2, 3}, {1, 2, 3}}));
    CHECK(z.cov.isZero(0.0));
    CHECK(kind_of([] { gaussian_stats(from_rows({{1.0}})); }) == ErrorKind::TooFewSamples);

    std::mt19937_64 gen(3);
    std::normal_distribution<double> nd;
    const std::vector<double> sd{1.0, 2.0, 0.5};
    oracle::Rows rows(500, std::vector<double>(3));
    for (auto& r : rows)
        for (int j = 0; j < 3; ++j) r[j] = sd[j] * nd(gen);
    const auto est = gaussian_stats(from_rows(rows));
    for (int j = 0; j < 3; ++j) CHECK(std::abs(est.cov(j, j) / (sd[j] * sd[j]) - 1.0) < 0.15);
}

TEST_CASE("sqrtm_psd") {
    CHECK(sqrtm_psd(Eigen::MatrixXd::Identity(3, 3)).isApprox(Eigen::MatrixXd::Identity(3, 3)));
    Eigen::MatrixXd d = Eigen::Vector2d(4, 9).asDiagonal();
    Eigen::MatrixXd want = Eigen::Vector2d(2, 3).asDiagonal();
    CHECK((sqrtm_psd(d) - want).norm() < 1e-14);

    std::mt19937_64 gen(5);
    std::normal_distribution<double> nd;
    for (int d2 : {1, 5, 40}) {
        Eigen::MatrixXd a(d2, d2);
        for (int i = 0; i < a.size(); ++i) a.data()[i] = nd(gen);
        const Eigen::MatrixXd m = a.transpose() * a;
        const Eigen::MatrixXd s = sqrtm_psd(m);
        CHECK((s * s - m).norm() <= 1e-9 * m.norm());
    }
    Eigen::Matrix2d asym;
    asym << 1, 2, 0, 1;
    CHECK(kind_of([&] { sqrtm_psd(asym); }) == ErrorKind::NotSymmetric);
    Eigen::Matrix2d neg;
    neg << 1, 0, 0, -1;
    CHECK(kind_of([&] { sqrtm_psd(neg); }) == ErrorKind::NotPsd);
}

TEST_CASE("frechet distance") {
    CHECK(frechet_distance(stats1d(0, 1), stats1d(0, 1)) == 0.0);
    CHECK(frechet_distance(stats1d(0, 1), stats1d(1, 1)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(frechet_distance(stats1d(0, 1), stats1d(0, 4)) == doctest::Approx(1.0).epsilon(1e-12));

    std::mt19937_64 gen(9);
    const auto fs = from_rows(random_rows(50, 6, gen));
    CHECK(frechet_distance(gaussian_stats(fs), gaussian_stats(fs)) == 0.0);

    GaussianStats a = stats1d(0, 1);
    GaussianStats b;
    b.mean = Eigen::VectorXd::Zero(2);
    b.cov = Eigen::MatrixXd::Identity(2, 2);
    CHECK(kind_of([&] { frechet_distance(a, b); }) == ErrorKind::DimMismatch);
}

TEST_CASE("KID hand cases") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(5, 4);
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(5, 4);
    y.col(0).setConstant(2.0);
    CHECK(mmd2_unbiased(x, y) == 7.0);

    oracle::Rows same(10, std::vector<double>{0.5, -1.0, 2.0});
    const auto fs = from_rows(same);
    CHECK(kid(fs, fs, 10, 3, 0).mean == 0.0);

    const std::vector<double> u{1, 2}, v{3, 4};
    CHECK(kid_kernel(u, v) == (11.0 / 2 + 1) * (11.0 / 2 + 1) * (11.0 / 2 + 1));
}

TEST_CASE("KID matches a naive double loop") {
    std::mt19937_64 gen(11);
    for (int rep = 0; rep < 10; ++rep) {
        const auto xr = random_rows(40, 16, gen);
        const auto yr = random_rows(40, 16, gen, 0.3);
        const auto r = kid(from_rows(xr), from_rows(yr), 40, 1, rep);
        CHECK(std::abs(r.mean - oracle::mmd2(xr, yr)) < 1e-10);
        CHECK(r.std == 0.0);
    }
}

TEST_CASE("KID subsets are seeded") {
    std::mt19937_64 gen(12);
    const auto x = from_rows(random_rows(60, 4, gen));
    const auto y = from_rows(random_rows(60, 4, gen, 1.0));
    const auto a = kid(x, y, 20, 10, 7);
    const auto b = kid(x, y, 20, 10, 7);
    CHECK(a.mean == b.mean);
    CHECK(a.std == b.std);
    CHECK(a.std > 0.0);
    CHECK(kid(x, y, 20, 10, 8).mean != a.mean);
    CHECK(kind_of([&] { kid(x, y, 61, 1, 0); }) == ErrorKind::SubsetTooLarge);
}

TEST_CASE("precision and recall") {
    std::mt19937_64 gen(13);
    const auto rr = random_rows(60, 5, gen);
    const auto real = from_rows(rr);
    const auto same = precision_recall(real, real, 3);
    CHECK(same.precision == 1.0);
    CHECK(same.recall == 1.0);
    CHECK(same.k == 3);

    const auto far = from_rows(random_rows(60, 5, gen, 1000.0));
    const auto sep = precision_recall(real, far, 3);
    CHECK(sep.precision == 0.0);
    CHECK(sep.recall == 0.0);

    for (int rep = 0; rep < 5; ++rep) {
        const auto fr = random_rows(50 + rep, 5, gen, 0.7);
        const auto pr = precision_recall(real, from_rows(fr), 1 + rep);
        CHECK(pr.precision == oracle::naive_coverage(rr, fr, 1 + rep));
        CHECK(pr.recall == oracle::naive_coverage(fr, rr, 1 + rep));
    }
    CHECK(kind_of([&] { precision_recall(real, far, 0); }) == ErrorKind::KTooLarge);
    CHECK(kind_of([&] { precision_recall(real, far, 60); }) == ErrorKind::KTooLarge);
}

TEST_CASE("planted half-inside fixture gives precision 0.5") {
    // Real: a unit grid line. Fake: 4 points on the line, 4 points far away.
    oracle::Rows real, fake;
    for (int i = 0; i < 10; ++i) real.push_back({static_cast<double>(i), 0.0});
    for (int i = 0; i < 4; ++i) fake.push_back({i + 2.0, 0.0});
    for (int i = 0; i < 4; ++i) fake.push_back({i * 10.0, 500.0});
    const auto pr = precision_recall(from_rows(real), from_rows(fake), 2);
    CHECK(pr.precision == 0.5);
    CHECK(pr.precision == oracle::naive_coverage(real, fake, 2));
}

TEST_CASE("patch FID reductions") {
    std::vector<imageprep::NormalizedImage> a, b;
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 6; ++i) {
        std::vector<double> d(16), e(16);
        for (auto& v : d) v = u(gen);
        for (auto& v : e) v = u(gen) * 0.5;
        a.push_back(img(4, d, "a" + std::to_string(i)));
        b.push_back(img(4, e, "b" + std::to_string(i)));
    }
    const auto ident = identity_featurizer();
    CHECK(patch_fid(a, a, 2, 30, ident, 3) == 0.0);

    // Full-size patches, one per image: the same as FID on flattened images.
    const auto pf = patch_fid(a, b, 4, 6, ident, 1);
    oracle::Rows ra, rb;
    for (const auto& m : a) ra.emplace_back(m.data.begin(), m.data.end());
    for (const auto& m : b) rb.emplace_back(m.data.begin(), m.data.end());
    FeatureSet fa = from_rows(ra), fb = from_rows(rb);
    // Identity featurizer emits float features; compare with the same rounding.
    const double plain = frechet_distance(gaussian_stats(fa), gaussian_stats(fb));
    CHECK(pf == doctest::Approx(plain).epsilon(1e-9));
    CHECK(pf > 0.0);

    const auto s1 = sample_patches(a, 2, 13, 5);
    const auto s2 = sample_patches(a, 2, 13, 5);
    REQUIRE(s1.size() == 13);
    for (std::size_t i = 0; i < s1.size(); ++i) {
        CHECK(s1[i].row == s2[i].row);
        CHECK(s1[i].col == s2[i].col);
    }
    const auto pooled = pooled_featurizer(2)(s1);
    CHECK(pooled.dim == 1);
}

TEST_CASE("pixel histograms and tails") {
    imageprep::U8Image seven{2, 2, {7, 7, 7, 7}};
    const auto h = pixel_histogram(std::vector{seven});
    CHECK(h.bins[7] == h.total);
    CHECK(h.mean_pixel == 7.0);
    CHECK(histogram_l1(h, h) == 0.0);
    const auto t0 = tail_mass(h, 0);
    CHECK(t0.left == 0.0);
    CHECK(t0.right == 1.0);
    const auto t150 = tail_mass(h, 150);
    CHECK(t150.left == 1.0);
    CHECK(t150.right == 0.0);
    CHECK(kind_of([&] { tail_mass(h, 256); }) == ErrorKind::BadArgs);
    CHECK(kind_of([&] { tail_mass(h, -1); }) == ErrorKind::BadArgs);

    imageprep::U8Image lo{1, 1, {0}}, hi{1, 1, {255}};
    CHECK(pixel_histogram(std::vector{lo, hi}).mean_pixel == 127.5);
    CHECK(histogram_l1(pixel_histogram(std::vector{lo}), pixel_histogram(std::vector{hi})) == 2.0);
    CHECK(kind_of([] { pixel_histogram(std::vector<imageprep::U8Image>{}); }) == ErrorKind::EmptyInput);
}

TEST_CASE("report validation and labels") {
    MetricReport r;
    r.model_id = "m";
    r.set("FID", -5e-7);
    r.set("precision", 0.5);
    validate(r);
    CHECK(*r.get("FID") == 0.0);
    r.set("FID", 1.0);
    CHECK(*r.get("FID") == 1.0);
    CHECK(r.values.size() == 2);
    r.set("recall", 1.5);
    CHECK(kind_of([&] { validate(r); }) == ErrorKind::InvariantViolation);
    r.set("recall", 1.0);
    r.set("KID", -0.01);  // unbiased estimate, may be negative
    validate(r);
    CHECK(*r.get("KID") == -0.01);
    r.set("FID-p64", -1e-3);
    CHECK(kind_of([&] { validate(r); }) == ErrorKind::InvariantViolation);

    CHECK(frechet_label("inception-v3-pool3") == "FID");
    CHECK(frechet_label("clip-vit-b32") == "CLIP-FID");
    CHECK(frechet_label("mae-in") == "MAE-IN-FD");
    CHECK(frechet_label("mae-sdo") == "MAE-SOL-FD");
    CHECK(frechet_label("unknown") == "FD[unknown]");
}

TEST_CASE("metric records and tables") {
    MetricReport r;
    r.model_id = "GAN, large";
    r.set("FID", 2.5);
    r.set("KID", 0.01);
    std::ostringstream os;
    records::write_line(os, records::metric_record(r));
    CHECK(os.str() == "{\"type\":\"metric\",\"model\":\"GAN, large\",\"values\":{\"FID\":2.5,\"KID\":0.01}}\n");
    std::istringstream is(os.str() + "{\"type\":\"meta\"}\n");
    const auto back = records::read_metric_records(is);
    REQUIRE(back.size() == 1);
    CHECK(back[0].model_id == r.model_id);
    CHECK(back[0].values == r.values);

    std::istringstream csv("model,FID,KID\n\"GAN, large\",2.5,0.01\nplain,3,0.02\n");
    const auto rows = records::read_metric_csv(csv);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].model_id == "GAN, large");
    CHECK(*rows[1].get("FID") == 3.0);
    CHECK(records::split_csv_line("a,\"b \"\"q\"\"\",c") == std::vector<std::string>{"a", "b \"q\"", "c"});

    const auto meta = records::meta_record("eval", {{"seed", 1}});
    CHECK(meta["std_divisor"] == "n-1");
    CHECK(meta.begin().key() == "type");
}
