#pragma once

#include <CLI11.hpp>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "helio/records.hpp"

namespace helio::cli {

struct IngestOptions {
    std::string in_dir;
    std::string out_dir;
    std::size_t resize = 0;
    std::int64_t max_dn = 16383;
    std::string normalization = "global";
    std::string quality_key = "QUALITY";
    std::string format = "htil";
};

struct EvalOptions {
    std::vector<std::string> real;
    std::vector<std::string> fake;
    std::string model;
    std::string metrics = "fid,kid,pr";
    std::string real_images;
    std::string fake_images;
    std::size_t patches = 2000;
    std::string patch_features = "pool:8";
    std::size_t kid_subset_size = 0;  // 0: min(1000, n)
    std::size_t kid_subsets = 100;
    std::size_t pr_k = 3;
    std::size_t max_samples = 50000;
    std::uint64_t seed = 0;
    std::string replay;
    std::string out;
};

struct ReportOptions {
    std::string table;
    std::vector<std::string> metrics;
    std::vector<double> runs;
    std::string study;
    std::string real_images;
    std::string fake_images;
    int cutoff = 150;
    std::string plot_dir;
    std::string out;
};

struct SynthOptions {
    std::string out_dir;
    std::size_t count = 8;
    std::size_t resolution = 256;
    double disc_radius = 0.8;
    double loop_density = 0.0;
    std::size_t holes = 0;
    double noise = 0.01;
    std::uint64_t seed = 0;
    std::string format = "htil";
};

struct LatentOptions {
    std::string bank;
    std::size_t k = 2;
    std::size_t component = 0;
    std::vector<double> coords{-2.0, -1.0, 0.0, 1.0, 2.0};
    bool relative = false;
    std::size_t samples = 4;
    std::string out_dir;
};

int cmd_ingest(const IngestOptions& o, std::ostream& out);
int cmd_eval(const EvalOptions& o, std::ostream& out);
int cmd_report(const ReportOptions& o, std::ostream& out);
int cmd_synth(const SynthOptions& o, std::ostream& out);
int cmd_latent(const LatentOptions& o, std::ostream& out);

/// Writes records to `path`, or to `fallback` when path is empty.
void emit_records(const std::string& path, const std::vector<records::Json>& recs, std::ostream& fallback);

}  // namespace helio::cli
