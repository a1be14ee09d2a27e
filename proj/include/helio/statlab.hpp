#pragma once

// Rank/product-moment correlation, run aggregation and the exact binomial
// test used for expert-study analysis. Standard deviations use divisor n - 1.

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "helio/metrics.hpp"

namespace helio::statlab {

/// Rows of metric reports restricted to an ordered list of metric names.
struct MetricTable {
    std::vector<metrics::MetricReport> rows;
    std::vector<std::string> metric_names;

    /// Column of one metric across rows. Throws InvariantViolation when a row
    /// lacks the metric.
    [[nodiscard]] std::vector<double> column(const std::string& name) const;
};

/// Builds a table; with an empty `names`, uses the metrics shared by every
/// row in first-row order. Throws EmptyInput, InvariantViolation.
MetricTable make_table(std::vector<metrics::MetricReport> rows, std::vector<std::string> names = {});

struct StudyResponse {
    std::string subject_id;
    double expertise = 1.0;
    std::int64_t correct = 0;
    std::int64_t n_questions = 10;
};

struct RunAggregate {
    std::vector<double> values;
    double mean = 0.0;
    double std = 0.0;
};

/// 1-based ranks; tied values share the mean of the ranks they span.
std::vector<double> average_ranks(std::span<const double> xs);

/// Throws LengthMismatch, DegenerateInput (fewer than 3 points or zero variance).
double pearson(std::span<const double> xs, std::span<const double> ys);

/// Pearson correlation of average ranks.
double spearman(std::span<const double> xs, std::span<const double> ys);

/// Spearman matrix over the table's metrics; diagonal fixed at 1.
std::vector<std::vector<double>> correlation_matrix(const MetricTable& table);

/// Throws TooFewRuns.
RunAggregate aggregate_runs(std::span<const double> values);

/// "mean ± std" with fixed decimals.
std::string format_aggregate(const RunAggregate& agg, int decimals = 1);

/// Binomial(n, p0) probability mass of every outcome.
std::vector<double> binomial_pmf(std::int64_t n, double p0);

/// Exact two-sided test: total probability of outcomes no more likely than k
/// (relative tolerance 1e-7 for ties). Throws BadArgs.
double binomial_test_two_sided(std::int64_t k, std::int64_t n, double p0 = 0.5);

struct StudyReport {
    std::size_t n_subjects = 0;
    double mean_correct = 0.0;
    double std_correct = 0.0;
    double mean_expertise = 0.0;
    double std_expertise = 0.0;
    std::int64_t total_correct = 0;
    std::int64_t total_questions = 0;
    double pooled_p_value = 1.0;
    /// Absent when either variable has zero variance or fewer than 3 subjects.
    std::optional<double> expertise_correct_pearson;
    /// correct_histogram[c] = subjects with c correct answers, c in [0, max n_questions].
    std::vector<std::size_t> correct_histogram;
    /// expertise_histogram[i] = subjects whose rating rounds to i + 1, i in [0, 4].
    std::vector<std::size_t> expertise_histogram;
};

/// Throws EmptyInput, InvariantViolation.
StudyReport study_report(std::span<const StudyResponse> responses);

/// CSV: subject_id,expertise,correct,n_questions (header row required).
std::vector<StudyResponse> read_study_csv(std::istream& in);

}  // namespace helio::statlab
