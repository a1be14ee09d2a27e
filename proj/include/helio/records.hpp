#pragma once

// Line-delimited JSON records shared by the CLI commands. Every output file
// starts with a "meta" record; keys keep insertion order so output is
// byte-stable.

#include <istream>
#include <json.hpp>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "helio/metrics.hpp"

namespace helio::records {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kToolkit = "helio";
inline constexpr std::string_view kVersion = "0.1.0";

Json meta_record(std::string_view command, Json params);
Json metric_record(const metrics::MetricReport& report);
metrics::MetricReport from_metric_record(const Json& record);

void write_line(std::ostream& out, const Json& record);

/// Metric records from a JSON-lines stream; other record types are skipped.
std::vector<metrics::MetricReport> read_metric_records(std::istream& in);

/// CSV with a header row: model,<metric>,<metric>,... Fields may be quoted.
std::vector<metrics::MetricReport> read_metric_csv(std::istream& in);

/// Dispatches on extension: .csv, otherwise JSON lines.
std::vector<metrics::MetricReport> read_metric_table(const std::string& path);

/// RFC 4180 field splitting for one line.
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace helio::records
