#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>

#include "../support/oracles.hpp"
#include "helio/cli.hpp"
#include "helio/featstore.hpp"
#include "helio/fits.hpp"
#include "helio/imageprep.hpp"
#include "helio/records.hpp"
#include "helio/statlab.hpp"

namespace fs = std::filesystem;
using namespace helio;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path temp_dir(const std::string& name) {
    auto p = fs::temp_directory_path() / ("helio_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
}

std::vector<records::Json> lines(const std::string& text) {
    std::vector<records::Json> out;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) out.push_back(records::Json::parse(line));
    return out;
}

void write_fits_with_quality(const fs::path& path, std::size_t side, std::optional<std::int64_t> quality) {
    std::vector<std::int64_t> data(side * side);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<std::int64_t>(i % 16384);
    auto img = fits::make_image(16, side, side, data, 32768.0);
    if (quality) img.cards.push_back({"QUALITY", *quality, "", true});
    fits::write_file(path.string(), fits::write_fits(img));
}

featstore::FeatureSet gaussian_features(std::size_t n, std::size_t d, double shift, unsigned seed,
                                        const std::string& id = "clip-rn50") {
    std::mt19937 gen(seed);
    std::normal_distribution<float> nd;
    featstore::FeatureSet f;
    f.extractor_id = id;
    f.dim = d;
    std::vector<float> row(d);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& v : row) v = nd(gen) + static_cast<float>(shift);
        f.push_back("s" + std::to_string(i), row);
    }
    return f;
}

}  // namespace

TEST_CASE("usage errors exit 2") {
    CHECK(run({}).code == cli::kUsage);
    CHECK(run({"nope"}).code == cli::kUsage);
    CHECK(run({"synth", "--out", "x", "--count", "0"}).code == cli::kUsage);
    CHECK(run({"report"}).code == cli::kUsage);
    const auto r = run({"eval", "--metrics", "fid-p64"});
    CHECK(r.code == cli::kUsage);
    CHECK(lines(r.err).front()["type"] == "error");
    CHECK(run({"--version"}).out == "0.1.0\n");
}

TEST_CASE("ingest filters by quality and resizes") {
    const auto dir = temp_dir("ingest");
    fs::create_directories(dir / "in");
    write_fits_with_quality(dir / "in" / "a.fits", 64, 0);
    write_fits_with_quality(dir / "in" / "b.fits", 64, 1);
    write_fits_with_quality(dir / "in" / "c.fits", 64, std::nullopt);
    std::ofstream(dir / "in" / "d.fits") << "garbage";
    const auto r = run({"ingest", "--in", (dir / "in").string(), "--out", (dir / "out").string(), "--resize", "16",
                        "--format", "both"});
    REQUIRE(r.code == 0);
    CHECK(r.out == "kept=1 rejected=3\n");
    const auto tile = imageprep::read_htil((dir / "out" / "a.htil").string());
    CHECK(tile.width == 16);
    CHECK(tile.height == 16);
    CHECK(fs::exists(dir / "out" / "a.png"));
    const auto manifest = lines(slurp(dir / "out" / "manifest.jsonl"));
    CHECK(manifest.front()["type"] == "meta");
    CHECK(manifest.back()["kept"] == 1);
    CHECK(manifest[3]["reason"] == "MissingQuality");

    fs::create_directories(dir / "empty");
    const auto e = run({"ingest", "--in", (dir / "empty").string(), "--out", (dir / "o2").string()});
    CHECK(e.code == cli::kDataError);
    CHECK(lines(e.err).front()["kind"] == "EmptyInput");
    CHECK(run({"ingest", "--in", (dir / "in").string(), "--out", (dir / "o3").string(), "--resize", "5"}).code ==
          cli::kUsage);
}

TEST_CASE("synth is deterministic") {
    const auto dir = temp_dir("synth");
    const std::vector<std::string> base{"synth", "--count", "3", "--resolution", "32", "--loop-density", "2",
                                        "--seed", "5"};
    auto a = base, b = base;
    a.insert(a.end(), {"--out", (dir / "a").string()});
    b.insert(b.end(), {"--out", (dir / "b").string()});
    REQUIRE(run(a).code == 0);
    REQUIRE(run(b).code == 0);
    for (int i = 0; i < 3; ++i) {
        const auto name = "synth_0000" + std::to_string(i) + ".htil";
        CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
        const auto img = imageprep::read_htil((dir / "a" / name).string());
        for (double v : img.data) REQUIRE((v >= 0.0 && v <= 1.0));
    }
}

TEST_CASE("eval on feature files") {
    const auto dir = temp_dir("eval");
    featstore::save(gaussian_features(60, 8, 0.0, 1), (dir / "real.feat").string());
    featstore::save(gaussian_features(60, 8, 0.5, 2), (dir / "fake.feat").string());
    featstore::save(gaussian_features(60, 8, 0.5, 2, "mae-sdo"), (dir / "other.feat").string());

    auto r = run({"eval", "--real", (dir / "real.feat").string(), "--fake", (dir / "real.feat").string(), "--metrics",
                  "fid", "--model", "self"});
    REQUIRE(r.code == 0);
    auto recs = lines(r.out);
    CHECK(recs[0]["type"] == "meta");
    CHECK(recs[1]["model"] == "self");
    CHECK(recs[1]["values"]["CLIP-FID"] == 0.0);

    r = run({"eval", "--real", (dir / "real.feat").string(), "--fake", (dir / "fake.feat").string(), "--kid-subset-size",
             "30", "--kid-subsets", "5", "--seed", "3", "--out", (dir / "m.jsonl").string()});
    REQUIRE(r.code == 0);
    recs = lines(slurp(dir / "m.jsonl"));
    const auto& v = recs[1]["values"];
    CHECK(v["CLIP-FID"].get<double>() > 0.0);
    CHECK(v.contains("KID"));
    CHECK(v["pr_k"] == 3.0);
    CHECK(v["precision"].get<double>() <= 1.0);

    r = run({"eval", "--real", (dir / "real.feat").string(), "--fake", (dir / "other.feat").string()});
    CHECK(r.code == cli::kDataError);
    CHECK(lines(r.err).front()["kind"] == "ExtractorMismatch");
    r = run({"eval", "--real", (dir / "real.feat").string(), "--fake", (dir / "fake.feat").string(), "--metrics", "pr",
             "--pr-k", "100"});
    CHECK(r.code == cli::kUsage);
}

TEST_CASE("eval patch FID on image folders") {
    const auto dir = temp_dir("patch");
    REQUIRE(run({"synth", "--out", (dir / "a").string(), "--count", "4", "--resolution", "32", "--seed", "1"}).code == 0);
    REQUIRE(run({"synth", "--out", (dir / "b").string(), "--count", "4", "--resolution", "32", "--seed", "2",
                 "--loop-density", "4"})
                .code == 0);
    auto r = run({"eval", "--metrics", "fid-p16", "--real-images", (dir / "a").string(), "--fake-images",
                  (dir / "a").string(), "--patches", "40", "--patch-features", "pool:4"});
    REQUIRE(r.code == 0);
    CHECK(lines(r.out)[1]["values"]["FID-p16"] == 0.0);
    r = run({"eval", "--metrics", "fid-p16", "--real-images", (dir / "a").string(), "--fake-images",
             (dir / "b").string(), "--patches", "40", "--patch-features", "pca:4:2"});
    REQUIRE(r.code == 0);
    CHECK(lines(r.out)[1]["values"]["FID-p16"].get<double>() > 0.0);
    r = run({"eval", "--metrics", "fid-p16", "--real-images", (dir / "a").string(), "--fake-images",
             (dir / "b").string(), "--patch-features", "magic"});
    CHECK(r.code == cli::kUsage);
}

TEST_CASE("replay and report") {
    const std::string table = HELIO_TEST_DATA "/ablation_metrics.csv";
    auto r = run({"eval", "--replay", table});
    REQUIRE(r.code == 0);
    const auto recs = lines(r.out);
    REQUIRE(recs.size() == 18);
    const auto& m = recs.back();
    CHECK(m["type"] == "spearman");
    for (std::size_t i = 0; i < m["metrics"].size(); ++i) CHECK(m["matrix"][i][i] == 1.0);
    CHECK(std::abs(m["matrix"][0][1].get<double>() - 0.75) <= 0.02);

    const auto dir = temp_dir("report");
    r = run({"report", "--table", table, "--plot-dir", (dir / "plots").string(), "--out", (dir / "r.jsonl").string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("1.00") != std::string::npos);
    CHECK(fs::exists(dir / "plots" / "correlation.png"));

    r = run({"report", "--table", table, "--metrics", "FID"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("FID") != std::string::npos);

    {
        std::ofstream study(dir / "study.csv");
        study << "subject_id,expertise,correct,n_questions\n";
        for (int i = 0; i < 20; ++i) study << "p" << i << "," << 1 + i % 5 << "," << (i == 0 ? 0 : 4 + (i % 3 == 0))
                                           << ",10\n";
    }
    r = run({"report", "--study", (dir / "study.csv").string(), "--out", (dir / "s.jsonl").string()});
    REQUIRE(r.code == 0);
    const auto srecs = lines(slurp(dir / "s.jsonl"));
    const auto& s = srecs.back();
    const auto total = s["total_correct"].get<unsigned>();
    CHECK(std::abs(s["pooled_p_value"].get<double>() - oracle::binomial_half_exact(total, 200)) < 1e-12);

    r = run({"report", "--runs", "2,3,4,5,7"});
    CHECK(r.out == "runs: 4.2 ± 1.9 (n=5)\n");
}

TEST_CASE("report histograms") {
    const auto dir = temp_dir("hist");
    REQUIRE(run({"synth", "--out", (dir / "a").string(), "--count", "2", "--resolution", "32"}).code == 0);
    auto r = run({"report", "--real-images", (dir / "a").string(), "--fake-images", (dir / "a").string(), "--plot-dir",
                  (dir / "p").string(), "--out", (dir / "h.jsonl").string()});
    REQUIRE(r.code == 0);
    const auto recs = lines(slurp(dir / "h.jsonl"));
    CHECK(recs.back()["l1"] == 0.0);
    CHECK(fs::exists(dir / "p" / "histogram.png"));
    CHECK(run({"report", "--real-images", (dir / "a").string(), "--cutoff", "256"}).code == cli::kUsage);
}

TEST_CASE("latent directions and grids") {
    const auto dir = temp_dir("latent");
    featstore::FeatureSet bank;
    bank.extractor_id = "W";
    bank.dim = 3;
    for (int i = 0; i < 6; ++i) {
        const float t = static_cast<float>(i) - 2.5f;
        bank.push_back("z" + std::to_string(i), std::vector<float>{t, 2 * t, 0.0f});
    }
    featstore::save(bank, (dir / "bank.feat").string());

    auto r = run({"latent", "--bank", (dir / "bank.feat").string(), "--k", "2", "--coords", "0", "--relative",
                  "--samples", "6", "--out", (dir / "out").string()});
    REQUIRE(r.code == 0);
    const auto side = lines(slurp(dir / "out" / "directions.jsonl"));
    CHECK(side.back()["eigenvalues"][1] == 0.0);
    const auto dirs = featstore::load((dir / "out" / "directions.feat").string());
    CHECK(dirs.extractor_id == "W-pca");
    CHECK(dirs.count() == 2);
    const auto grid = featstore::load((dir / "out" / "grid.feat").string());
    REQUIRE(grid.count() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
        for (std::size_t j = 0; j < 3; ++j) CHECK(grid.row(i)[j] == doctest::Approx(bank.row(i)[j]).epsilon(1e-6));
    }

    r = run({"latent", "--bank", (dir / "bank.feat").string(), "--k", "4", "--out", (dir / "o2").string()});
    CHECK(r.code == cli::kUsage);
    CHECK(lines(r.err).front()["kind"] == "KTooLarge");
    r = run({"latent", "--bank", (dir / "bank.feat").string(), "--k", "1", "--coords", "-1,0,1", "--out",
             (dir / "o3").string()});
    REQUIRE(r.code == 0);
    CHECK(featstore::load((dir / "o3" / "grid.feat").string()).count() == 12);
}
