#include <algorithm>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "commands.hpp"
#include "helio/error.hpp"
#include "helio/latentlab.hpp"
#include "helio/metrics.hpp"
#include "helio/random.hpp"
#include "helio/statlab.hpp"

namespace helio::cli {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        if (!item.empty()) parts.push_back(item);
    }
    return parts;
}

std::size_t parse_size(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const auto v = std::stoull(s, &pos);
        if (pos == s.size() && v > 0) return v;
    } catch (const std::exception&) {
    }
    fail(ErrorKind::Usage, "bad " + what + " '" + s + "'");
}

/// Keeps at most `budget` rows, chosen by a seeded draw, in original order.
featstore::FeatureSet apply_budget(const featstore::FeatureSet& fs, std::size_t budget, std::uint64_t seed) {
    if (budget == 0 || fs.count() <= budget) return fs;
    std::vector<std::size_t> idx(fs.count());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(derive_seed(seed, "budget:" + fs.extractor_id));
    rng.shuffle(std::span(idx));
    idx.resize(budget);
    std::sort(idx.begin(), idx.end());
    featstore::FeatureSet out;
    out.extractor_id = fs.extractor_id;
    out.dim = fs.dim;
    for (auto i : idx) out.push_back(fs.sample_ids[i], fs.row(i));
    return out;
}

metrics::PatchFeaturizer make_featurizer(const std::string& desc, std::span<const imageprep::NormalizedImage> fit_images,
                                         std::size_t patch_size, std::size_t n_fit, std::uint64_t seed) {
    const auto parts = split(desc, ':');
    if (parts.empty()) fail(ErrorKind::Usage, "empty --patch-features");
    if (parts[0] == "identity" && parts.size() == 1) return metrics::identity_featurizer();
    if (parts[0] == "pool" && parts.size() == 2) return metrics::pooled_featurizer(parse_size(parts[1], "pool factor"));
    if (parts[0] == "pca" && (parts.size() == 2 || parts.size() == 3)) {
        const std::size_t k = parse_size(parts[1], "PCA rank");
        const std::size_t pool = parts.size() == 3 ? parse_size(parts[2], "pool factor") : 4;
        const auto fit_patches = metrics::sample_patches(fit_images, patch_size, n_fit, derive_seed(seed, "pca-fit"));
        const auto pooled = metrics::pooled_featurizer(pool)(fit_patches);
        const auto dirs = latentlab::pca(latentlab::from_features(pooled), k);
        return metrics::projection_featurizer(dirs.mean, dirs.components, pool);
    }
    fail(ErrorKind::Usage, "unknown --patch-features '" + desc + "'");
}

records::Json spearman_record(const statlab::MetricTable& table) {
    const auto rho = statlab::correlation_matrix(table);
    records::Json j;
    j["type"] = "spearman";
    j["metrics"] = table.metric_names;
    j["matrix"] = rho;
    return j;
}

int replay(const EvalOptions& o, std::ostream& out) {
    auto rows = records::read_metric_table(o.replay);
    records::Json params;
    params["replay"] = o.replay;
    std::vector<records::Json> recs{records::meta_record("eval", params)};
    for (auto& r : rows) {
        metrics::validate(r);
        recs.push_back(records::metric_record(r));
    }
    recs.push_back(spearman_record(statlab::make_table(std::move(rows))));
    emit_records(o.out, recs, out);
    return 0;
}

}  // namespace

int cmd_eval(const EvalOptions& o, std::ostream& out) {
    if (!o.replay.empty()) return replay(o, out);
    bool want_fid = false, want_kid = false, want_pr = false;
    std::vector<std::size_t> patch_sizes;
    for (const auto& m : split(o.metrics, ',')) {
        if (m == "fid") {
            want_fid = true;
        } else if (m == "kid") {
            want_kid = true;
        } else if (m == "pr") {
            want_pr = true;
        } else if (m.starts_with("fid-p")) {
            patch_sizes.push_back(parse_size(m.substr(5), "patch size"));
        } else {
            fail(ErrorKind::Usage, "unknown metric '" + m + "'");
        }
    }
    if (!patch_sizes.empty() && (o.real_images.empty() || o.fake_images.empty())) {
        fail(ErrorKind::Usage, "patch FID requires --real-images and --fake-images");
    }

    const bool want_features = want_fid || want_kid || want_pr;
    if (want_features && (o.real.empty() || o.real.size() != o.fake.size())) {
        fail(ErrorKind::Usage, "give one or more --real/--fake pairs (or --replay)");
    }

    std::vector<std::pair<featstore::FeatureSet, featstore::FeatureSet>> pairs;
    for (std::size_t i = 0; want_features && i < o.real.size(); ++i) {
        auto r = apply_budget(featstore::load(o.real[i]), o.max_samples, o.seed);
        auto f = apply_budget(featstore::load(o.fake[i]), o.max_samples, o.seed);
        if (r.extractor_id != f.extractor_id) {
            fail(ErrorKind::ExtractorMismatch, "'" + r.extractor_id + "' vs '" + f.extractor_id + "'");
        }
        pairs.emplace_back(std::move(r), std::move(f));
    }

    metrics::MetricReport report;
    report.model_id = o.model;
    if (report.model_id.empty()) {
        report.model_id = o.fake.empty() ? std::filesystem::path(o.fake_images).filename().string()
                                         : std::filesystem::path(o.fake.front()).stem().string();
    }

    records::Json params;
    params["seed"] = o.seed;
    params["real"] = o.real;
    params["fake"] = o.fake;
    params["metrics"] = o.metrics;
    params["max_samples"] = o.max_samples;

    if (want_fid) {
        for (const auto& [r, f] : pairs) {
            report.set(metrics::frechet_label(r.extractor_id),
                       metrics::frechet_distance(metrics::gaussian_stats(r), metrics::gaussian_stats(f)));
        }
    }
    if (want_kid) {
        const auto& [real0, fake0] = pairs.front();
        const std::size_t subset = o.kid_subset_size != 0
                                       ? o.kid_subset_size
                                       : std::min({metrics::kDefaultKidSubsetSize, real0.count(), fake0.count()});
        const auto k = metrics::kid(real0, fake0, subset, o.kid_subsets, o.seed);
        report.set("KID", k.mean);
        report.set("KID_std", k.std);
        params["kid_subset_size"] = subset;
        params["kid_subsets"] = o.kid_subsets;
    }
    if (want_pr) {
        const auto& [real0, fake0] = pairs.front();
        const auto pr = metrics::precision_recall(real0, fake0, o.pr_k);
        report.set("precision", pr.precision);
        report.set("recall", pr.recall);
        report.set("pr_k", static_cast<double>(pr.k));
        params["pr_k"] = o.pr_k;
    }
    if (!patch_sizes.empty()) {
        const auto real_imgs = imageprep::load_image_folder(o.real_images);
        const auto fake_imgs = imageprep::load_image_folder(o.fake_images);
        if (real_imgs.empty() || fake_imgs.empty()) fail(ErrorKind::EmptyInput, "image folder is empty");
        for (std::size_t size : patch_sizes) {
            const auto featurize = make_featurizer(o.patch_features, real_imgs, size, o.patches, o.seed);
            report.set("FID-p" + std::to_string(size),
                       metrics::patch_fid(real_imgs, fake_imgs, size, o.patches, featurize, o.seed));
        }
        params["patches"] = o.patches;
        params["patch_features"] = o.patch_features;
    }
    metrics::validate(report);

    emit_records(o.out, {records::meta_record("eval", params), records::metric_record(report)}, out);
    return 0;
}

}  // namespace helio::cli
