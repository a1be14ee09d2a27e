#include "helio/records.hpp"

#include <charconv>
#include <fstream>

#include "helio/error.hpp"

namespace helio::records {

Json meta_record(std::string_view command, Json params) {
    Json j;
    j["type"] = "meta";
    j["toolkit"] = kToolkit;
    j["version"] = kVersion;
    j["command"] = command;
    j["std_divisor"] = "n-1";
    j["params"] = std::move(params);
    return j;
}

Json metric_record(const metrics::MetricReport& report) {
    Json j;
    j["type"] = "metric";
    j["model"] = report.model_id;
    Json values = Json::object();
    for (const auto& [k, v] : report.values) values[k] = v;
    j["values"] = std::move(values);
    return j;
}

metrics::MetricReport from_metric_record(const Json& record) {
    metrics::MetricReport r;
    try {
        r.model_id = record.at("model").get<std::string>();
        for (const auto& [k, v] : record.at("values").items()) r.set(k, v.get<double>());
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::InvariantViolation, std::string("bad metric record: ") + e.what());
    }
    return r;
}

void write_line(std::ostream& out, const Json& record) { out << record.dump() << '\n'; }

std::vector<metrics::MetricReport> read_metric_records(std::istream& in) {
    std::vector<metrics::MetricReport> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorKind::InvariantViolation, "line " + std::to_string(line_no) + ": " + e.what());
        }
        if (j.value("type", "") == "metric") out.push_back(from_metric_record(j));
    }
    return out;
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    if (quoted) fail(ErrorKind::InvariantViolation, "unterminated quote in CSV line");
    fields.push_back(std::move(cur));
    return fields;
}

namespace {

double parse_number(const std::string& field, std::size_t line_no) {
    std::string_view s = field;
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        fail(ErrorKind::InvariantViolation, "line " + std::to_string(line_no) + ": '" + field + "' is not a number");
    }
    return v;
}

}  // namespace

std::vector<metrics::MetricReport> read_metric_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (header.empty() && std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") != std::string::npos) header = split_csv_line(line);
    }
    if (header.size() < 2) fail(ErrorKind::EmptyInput, "CSV table needs a header with at least one metric column");
    std::vector<metrics::MetricReport> out;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            fail(ErrorKind::InvariantViolation, "line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                                                    " fields, header has " + std::to_string(header.size()));
        }
        metrics::MetricReport r;
        r.model_id = fields[0];
        for (std::size_t i = 1; i < fields.size(); ++i) r.set(header[i], parse_number(fields[i], line_no));
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<metrics::MetricReport> read_metric_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::IoFailure, "cannot open " + path);
    if (path.ends_with(".csv")) return read_metric_csv(in);
    return read_metric_records(in);
}

}  // namespace helio::records
