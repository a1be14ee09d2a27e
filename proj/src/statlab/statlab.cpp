#include "helio/statlab.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "helio/error.hpp"
#include "helio/records.hpp"

namespace helio::statlab {

namespace {

constexpr double kTieTolerance = 1e-7;

double mean_of(std::span<const double> xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

/// Two-pass sample standard deviation.
double sample_std(std::span<const double> xs, double mean) {
    if (xs.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

std::vector<double> MetricTable::column(const std::string& name) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        const auto v = r.get(name);
        if (!v) fail(ErrorKind::InvariantViolation, "model '" + r.model_id + "' has no value for " + name);
        out.push_back(*v);
    }
    return out;
}

MetricTable make_table(std::vector<metrics::MetricReport> rows, std::vector<std::string> names) {
    if (rows.empty()) fail(ErrorKind::EmptyInput, "metric table has no rows");
    if (names.empty()) {
        for (const auto& [name, value] : rows.front().values) {
            if (std::all_of(rows.begin(), rows.end(), [&](const auto& r) { return r.get(name).has_value(); })) {
                names.push_back(name);
            }
        }
    }
    MetricTable t{std::move(rows), std::move(names)};
    for (const auto& n : t.metric_names) (void)t.column(n);
    return t;
}

std::vector<double> average_ranks(std::span<const double> xs) {
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(xs.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
        i = j + 1;
    }
    return ranks;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) {
        fail(ErrorKind::LengthMismatch, std::to_string(xs.size()) + " vs " + std::to_string(ys.size()));
    }
    if (xs.size() < 3) fail(ErrorKind::DegenerateInput, "need at least 3 points");
    const double mx = mean_of(xs);
    const double my = mean_of(ys);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) fail(ErrorKind::DegenerateInput, "zero variance");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) {
        fail(ErrorKind::LengthMismatch, std::to_string(xs.size()) + " vs " + std::to_string(ys.size()));
    }
    const auto rx = average_ranks(xs);
    const auto ry = average_ranks(ys);
    return pearson(rx, ry);
}

std::vector<std::vector<double>> correlation_matrix(const MetricTable& table) {
    const std::size_t m = table.metric_names.size();
    std::vector<std::vector<double>> columns;
    columns.reserve(m);
    for (const auto& name : table.metric_names) columns.push_back(table.column(name));
    std::vector<std::vector<double>> rho(m, std::vector<double>(m, 1.0));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) rho[i][j] = rho[j][i] = spearman(columns[i], columns[j]);
    }
    return rho;
}

RunAggregate aggregate_runs(std::span<const double> values) {
    if (values.size() < 2) fail(ErrorKind::TooFewRuns, "need at least 2 runs, got " + std::to_string(values.size()));
    RunAggregate agg;
    agg.values.assign(values.begin(), values.end());
    agg.mean = mean_of(values);
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    agg.mean = std::clamp(agg.mean, *lo, *hi);
    agg.std = sample_std(values, agg.mean);
    return agg;
}

std::string format_aggregate(const RunAggregate& agg, int decimals) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.*f ± %.*f", decimals, agg.mean, decimals, agg.std);
    return buf;
}

std::vector<double> binomial_pmf(std::int64_t n, double p0) {
    if (n < 0 || !(p0 > 0.0 && p0 < 1.0)) fail(ErrorKind::BadArgs, "need n >= 0 and 0 < p0 < 1");
    std::vector<double> pmf(static_cast<std::size_t>(n) + 1);
    const long double log_ratio = std::log(static_cast<long double>(p0)) - std::log1p(-static_cast<long double>(p0));
    long double log_p = static_cast<long double>(n) * std::log1p(-static_cast<long double>(p0));
    for (std::int64_t i = 0; i <= n; ++i) {
        pmf[static_cast<std::size_t>(i)] = static_cast<double>(std::exp(log_p));
        if (i < n) {
            log_p += std::log(static_cast<long double>(n - i)) - std::log(static_cast<long double>(i + 1)) + log_ratio;
        }
    }
    return pmf;
}

double binomial_test_two_sided(std::int64_t k, std::int64_t n, double p0) {
    if (n < 0 || k < 0 || k > n) fail(ErrorKind::BadArgs, "need 0 <= k <= n");
    const auto pmf = binomial_pmf(n, p0);
    const double threshold = pmf[static_cast<std::size_t>(k)] * (1.0 + kTieTolerance);
    long double total = 0.0L;
    for (double p : pmf) {
        if (p <= threshold) total += p;
    }
    return std::min(1.0, static_cast<double>(total));
}

StudyReport study_report(std::span<const StudyResponse> responses) {
    if (responses.empty()) fail(ErrorKind::EmptyInput, "no study responses");
    StudyReport rep;
    rep.n_subjects = responses.size();
    std::vector<double> correct, expertise;
    std::int64_t max_questions = 0;
    for (const auto& r : responses) {
        if (r.n_questions < 1 || r.correct < 0 || r.correct > r.n_questions) {
            fail(ErrorKind::InvariantViolation, "subject " + r.subject_id + ": correct must lie in [0, n_questions]");
        }
        if (!(r.expertise >= 1.0 && r.expertise <= 5.0)) {
            fail(ErrorKind::InvariantViolation, "subject " + r.subject_id + ": expertise must lie in [1, 5]");
        }
        correct.push_back(static_cast<double>(r.correct));
        expertise.push_back(r.expertise);
        rep.total_correct += r.correct;
        rep.total_questions += r.n_questions;
        max_questions = std::max(max_questions, r.n_questions);
    }
    rep.mean_correct = mean_of(correct);
    rep.std_correct = sample_std(correct, rep.mean_correct);
    rep.mean_expertise = mean_of(expertise);
    rep.std_expertise = sample_std(expertise, rep.mean_expertise);
    rep.pooled_p_value = binomial_test_two_sided(rep.total_correct, rep.total_questions, 0.5);
    try {
        rep.expertise_correct_pearson = pearson(expertise, correct);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::DegenerateInput) throw;
    }
    rep.correct_histogram.assign(static_cast<std::size_t>(max_questions) + 1, 0);
    rep.expertise_histogram.assign(5, 0);
    for (const auto& r : responses) {
        ++rep.correct_histogram[static_cast<std::size_t>(r.correct)];
        const auto bin = static_cast<std::size_t>(std::clamp(std::lround(r.expertise), 1L, 5L) - 1);
        ++rep.expertise_histogram[bin];
    }
    return rep;
}

std::vector<StudyResponse> read_study_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::vector<StudyResponse> out;
    auto to_int = [&](const std::string& s) {
        std::int64_t v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
            fail(ErrorKind::InvariantViolation, "line " + std::to_string(line_no) + ": '" + s + "' is not an integer");
        }
        return v;
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto f = records::split_csv_line(line);
        if (!header_seen) {
            if (f.size() != 4 || f[0] != "subject_id") {
                fail(ErrorKind::InvariantViolation, "study CSV header must be subject_id,expertise,correct,n_questions");
            }
            header_seen = true;
            continue;
        }
        if (f.size() != 4) fail(ErrorKind::InvariantViolation, "line " + std::to_string(line_no) + ": expected 4 fields");
        StudyResponse r;
        r.subject_id = f[0];
        const auto [ptr, ec] = std::from_chars(f[1].data(), f[1].data() + f[1].size(), r.expertise);
        if (f[1].empty() || ec != std::errc{} || ptr != f[1].data() + f[1].size()) {
            fail(ErrorKind::InvariantViolation, "line " + std::to_string(line_no) + ": bad expertise '" + f[1] + "'");
        }
        r.correct = to_int(f[2]);
        r.n_questions = to_int(f[3]);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace helio::statlab
