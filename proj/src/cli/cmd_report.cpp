#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "commands.hpp"
#include "helio/error.hpp"
#include "helio/imageprep.hpp"
#include "helio/metrics.hpp"
#include "helio/statlab.hpp"

namespace helio::cli {

namespace fs = std::filesystem;

namespace {

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

// Correlation heatmap: one 24px cell per entry, blue (-1) to white (0) to red (+1).
void plot_heatmap(const std::string& path, const std::vector<std::vector<double>>& m) {
    constexpr std::size_t cell = 24;
    imageprep::U8Image img;
    const std::size_t n = m.size();
    img.width = img.height = n * cell;
    img.data.assign(img.width * img.height, 0);
    for (std::size_t r = 0; r < img.height; ++r) {
        for (std::size_t c = 0; c < img.width; ++c) {
            const double v = m[r / cell][c / cell];
            // Grey-scale encoding of |rho|; sign is in the records.
            img.data[r * img.width + c] = imageprep::quantize_value(1.0 - std::abs(v));
        }
    }
    imageprep::write_png(path, img);
}

// Two overlaid bar charts on a log scale: real in the top half, generated below.
void plot_histograms(const std::string& path, const metrics::PixelHistogram& a, const metrics::PixelHistogram& b) {
    constexpr std::size_t half = 128;
    imageprep::U8Image img;
    img.width = 256;
    img.height = 2 * half;
    img.data.assign(img.width * img.height, 255);
    auto draw = [&](const metrics::PixelHistogram& h, std::size_t top) {
        double peak = 0.0;
        for (auto v : h.bins) peak = std::max(peak, std::log1p(static_cast<double>(v)));
        if (peak == 0.0) return;
        for (std::size_t x = 0; x < 256; ++x) {
            const auto bar = static_cast<std::size_t>(std::log1p(static_cast<double>(h.bins[x])) / peak * (half - 1));
            for (std::size_t y = 0; y < bar; ++y) img.data[(top + half - 1 - y) * img.width + x] = 0;
        }
    };
    draw(a, 0);
    draw(b, half);
    imageprep::write_png(path, img);
}

metrics::PixelHistogram folder_histogram(const std::string& dir) {
    const auto images = imageprep::load_image_folder(dir);
    std::vector<imageprep::U8Image> q;
    q.reserve(images.size());
    for (const auto& img : images) q.push_back(imageprep::quantize_u8(img));
    return metrics::pixel_histogram(q);
}

records::Json histogram_json(const metrics::PixelHistogram& h, int cutoff) {
    const auto t = metrics::tail_mass(h, cutoff);
    records::Json j;
    j["total"] = h.total;
    j["mean_pixel"] = h.mean_pixel;
    j["left"] = t.left;
    j["right"] = t.right;
    j["bins"] = h.bins;
    return j;
}

}  // namespace

int cmd_report(const ReportOptions& o, std::ostream& out) {
    const bool any_images = !o.real_images.empty() || !o.fake_images.empty();
    if (o.table.empty() && o.runs.empty() && o.study.empty() && !any_images) {
        fail(ErrorKind::Usage, "nothing to report: give --table, --runs, --study or image folders");
    }
    if (any_images && (o.real_images.empty() || o.fake_images.empty())) {
        fail(ErrorKind::Usage, "histograms need both --real-images and --fake-images");
    }
    if (!o.plot_dir.empty()) {
        std::error_code ec;
        fs::create_directories(o.plot_dir, ec);
        if (!fs::is_directory(o.plot_dir)) fail(ErrorKind::IoFailure, "cannot create " + o.plot_dir);
    }

    records::Json params;
    params["table"] = o.table;
    params["study"] = o.study;
    params["cutoff"] = o.cutoff;
    std::vector<records::Json> recs{records::meta_record("report", params)};

    if (!o.table.empty()) {
        const auto table = statlab::make_table(records::read_metric_table(o.table), o.metrics);
        const auto rho = statlab::correlation_matrix(table);
        std::size_t w = 8;
        for (const auto& n : table.metric_names) w = std::max(w, n.size() + 1);
        out << "Spearman correlation (" << table.rows.size() << " models)\n";
        out << std::string(w, ' ');
        for (const auto& n : table.metric_names) out << std::string(w - n.size(), ' ') << n;
        out << '\n';
        for (std::size_t i = 0; i < rho.size(); ++i) {
            const auto& name = table.metric_names[i];
            out << name << std::string(w - name.size(), ' ');
            for (double v : rho[i]) {
                const auto s = fixed(v, 2);
                out << std::string(w - s.size(), ' ') << s;
            }
            out << '\n';
        }
        records::Json j;
        j["type"] = "spearman";
        j["metrics"] = table.metric_names;
        j["matrix"] = rho;
        recs.push_back(j);
        if (!o.plot_dir.empty()) plot_heatmap((fs::path(o.plot_dir) / "correlation.png").string(), rho);
    }

    if (!o.runs.empty()) {
        const auto agg = statlab::aggregate_runs(o.runs);
        out << "runs: " << statlab::format_aggregate(agg, 1) << " (n=" << agg.values.size() << ")\n";
        records::Json j;
        j["type"] = "aggregate";
        j["values"] = agg.values;
        j["mean"] = agg.mean;
        j["std"] = agg.std;
        recs.push_back(j);
    }

    if (any_images) {
        const auto real = folder_histogram(o.real_images);
        const auto fake = folder_histogram(o.fake_images);
        const auto tr = metrics::tail_mass(real, o.cutoff);
        const auto tf = metrics::tail_mass(fake, o.cutoff);
        out << "pixel histograms (cutoff " << o.cutoff << ")\n";
        out << "           mean    <cut    >=cut\n";
        out << "real   " << fixed(real.mean_pixel, 2) << "  " << fixed(tr.left, 4) << "  " << fixed(tr.right, 4) << '\n';
        out << "fake   " << fixed(fake.mean_pixel, 2) << "  " << fixed(tf.left, 4) << "  " << fixed(tf.right, 4) << '\n';
        out << "L1 distance " << fixed(metrics::histogram_l1(real, fake), 4) << '\n';
        records::Json j;
        j["type"] = "histogram";
        j["cutoff"] = o.cutoff;
        j["real"] = histogram_json(real, o.cutoff);
        j["fake"] = histogram_json(fake, o.cutoff);
        j["l1"] = metrics::histogram_l1(real, fake);
        recs.push_back(j);
        if (!o.plot_dir.empty()) plot_histograms((fs::path(o.plot_dir) / "histogram.png").string(), real, fake);
    }

    if (!o.study.empty()) {
        std::ifstream f(o.study);
        if (!f) fail(ErrorKind::IoFailure, "cannot open " + o.study);
        const auto responses = statlab::read_study_csv(f);
        const auto s = statlab::study_report(responses);
        out << "study: " << s.n_subjects << " subjects, " << s.total_correct << "/" << s.total_questions << " correct\n";
        out << "  correct   " << fixed(s.mean_correct, 2) << " ± " << fixed(s.std_correct, 2) << '\n';
        out << "  expertise " << fixed(s.mean_expertise, 2) << " ± " << fixed(s.std_expertise, 2) << '\n';
        out << "  pooled two-sided binomial p = " << fixed(s.pooled_p_value, 4) << '\n';
        if (s.expertise_correct_pearson) {
            out << "  pearson(expertise, correct) = " << fixed(*s.expertise_correct_pearson, 3) << '\n';
        }
        records::Json j;
        j["type"] = "study";
        j["n_subjects"] = s.n_subjects;
        j["mean_correct"] = s.mean_correct;
        j["std_correct"] = s.std_correct;
        j["mean_expertise"] = s.mean_expertise;
        j["std_expertise"] = s.std_expertise;
        j["total_correct"] = s.total_correct;
        j["total_questions"] = s.total_questions;
        j["pooled_p_value"] = s.pooled_p_value;
        j["expertise_correct_pearson"] =
            s.expertise_correct_pearson ? records::Json(*s.expertise_correct_pearson) : records::Json(nullptr);
        j["correct_histogram"] = s.correct_histogram;
        j["expertise_histogram"] = s.expertise_histogram;
        recs.push_back(j);
    }

    if (!o.out.empty()) emit_records(o.out, recs, out);
    return 0;
}

}  // namespace helio::cli
