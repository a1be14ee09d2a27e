#include "helio/cli.hpp"

#include <algorithm>
#include <fstream>

#include "commands.hpp"
#include "helio/error.hpp"

namespace helio::cli {

namespace {

void error_record(std::ostream& err, std::string_view kind, const std::string& message) {
    records::Json j;
    j["type"] = "error";
    j["kind"] = kind;
    j["message"] = message;
    err << j.dump() << '\n';
}

int exit_code_for(ErrorKind kind) {
    switch (classify(kind)) {
        case ErrorClass::Usage: return kUsage;
        case ErrorClass::Numerics: return kNumericsError;
        case ErrorClass::Data: return kDataError;
    }
    return kDataError;
}

}  // namespace

void emit_records(const std::string& path, const std::vector<records::Json>& recs, std::ostream& fallback) {
    if (path.empty() || path == "-") {
        for (const auto& r : recs) records::write_line(fallback, r);
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(ErrorKind::IoFailure, "cannot create " + path);
    for (const auto& r : recs) records::write_line(f, r);
    if (!f) fail(ErrorKind::IoFailure, "write failed for " + path);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"helio: measurement toolkit for generative models of solar EUV images"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(records::kVersion));

    IngestOptions ingest;
    auto* sub_ingest = app.add_subcommand("ingest", "Filter FITS files by quality and write normalized tiles");
    sub_ingest->set_config("--config", "", "key=value configuration file");
    sub_ingest->add_option("--in", ingest.in_dir, "Directory of FITS files")->required();
    sub_ingest->add_option("--out", ingest.out_dir, "Output corpus directory")->required();
    sub_ingest->add_option("--resize", ingest.resize, "Output side length (box downsampling); 0 keeps size");
    sub_ingest->add_option("--max-dn", ingest.max_dn, "Normalization ceiling in DN");
    sub_ingest->add_option("--normalization", ingest.normalization, "global or per-image")
        ->check(CLI::IsMember({"global", "per-image"}));
    sub_ingest->add_option("--quality-key", ingest.quality_key, "Header keyword holding the quality flag");
    sub_ingest->add_option("--format", ingest.format, "htil, png or both")->check(CLI::IsMember({"htil", "png", "both"}));

    EvalOptions eval;
    auto* sub_eval = app.add_subcommand("eval", "Compute metrics between real and generated features");
    sub_eval->set_config("--config", "", "key=value configuration file");
    sub_eval->add_option("--real", eval.real, "Real-sample FEAT1 file (repeat per extractor)");
    sub_eval->add_option("--fake", eval.fake, "Generated-sample FEAT1 file (repeat per extractor)");
    sub_eval->add_option("--model", eval.model, "Model id for the report");
    sub_eval->add_option("--metrics", eval.metrics, "Comma list: fid,kid,pr,fid-p64,fid-p128,fid-p256,...");
    sub_eval->add_option("--real-images", eval.real_images, "Real image folder (patch-FID)");
    sub_eval->add_option("--fake-images", eval.fake_images, "Generated image folder (patch-FID)");
    sub_eval->add_option("--patches", eval.patches, "Patches per side for patch-FID");
    sub_eval->add_option("--patch-features", eval.patch_features, "identity | pool:N | pca:K[:N]");
    sub_eval->add_option("--kid-subset-size", eval.kid_subset_size, "KID subset size (default min(1000, n))");
    sub_eval->add_option("--kid-subsets", eval.kid_subsets, "Number of KID subsets");
    sub_eval->add_option("--pr-k", eval.pr_k, "Neighbourhood size for precision/recall");
    sub_eval->add_option("--max-samples", eval.max_samples, "Per-set sample budget");
    sub_eval->add_option("--seed", eval.seed, "Seed for every randomized step");
    sub_eval->add_option("--replay", eval.replay, "Metric table (CSV or records) to replay instead of features");
    sub_eval->add_option("--out", eval.out, "Record output file (default stdout)");

    ReportOptions report;
    auto* sub_report = app.add_subcommand("report", "Correlations, run aggregates, histograms and study statistics");
    sub_report->set_config("--config", "", "key=value configuration file");
    sub_report->add_option("--table", report.table, "Metric table (CSV or records)");
    sub_report->add_option("--metrics", report.metrics, "Metric columns to correlate")->delimiter(',');
    sub_report->add_option("--runs", report.runs, "Per-run values to aggregate")->delimiter(',');
    sub_report->add_option("--study", report.study, "Study CSV: subject_id,expertise,correct,n_questions");
    sub_report->add_option("--real-images", report.real_images, "Real image folder for pixel histograms");
    sub_report->add_option("--fake-images", report.fake_images, "Generated image folder for pixel histograms");
    sub_report->add_option("--cutoff", report.cutoff, "Tail cutoff on the 0-255 scale")->check(CLI::Range(0, 255));
    sub_report->add_option("--plot-dir", report.plot_dir, "Write PNG charts here");
    sub_report->add_option("--out", report.out, "Record output file");

    SynthOptions synth;
    auto* sub_synth = app.add_subcommand("synth", "Write a deterministic synthetic sun corpus");
    sub_synth->set_config("--config", "", "key=value configuration file");
    sub_synth->add_option("--out", synth.out_dir, "Output directory")->required();
    sub_synth->add_option("--count", synth.count, "Number of images");
    sub_synth->add_option("--resolution", synth.resolution, "Image side length");
    sub_synth->add_option("--disc-radius", synth.disc_radius, "Disc radius as a fraction of half the image");
    sub_synth->add_option("--loop-density", synth.loop_density, "Expected number of limb arcs");
    sub_synth->add_option("--holes", synth.holes, "Number of dark holes");
    sub_synth->add_option("--noise", synth.noise, "Gaussian noise standard deviation");
    sub_synth->add_option("--seed", synth.seed, "Corpus seed");
    sub_synth->add_option("--format", synth.format, "htil, png or both")->check(CLI::IsMember({"htil", "png", "both"}));

    LatentOptions latent;
    auto* sub_latent = app.add_subcommand("latent", "PCA directions and edit grids over a latent bank");
    sub_latent->set_config("--config", "", "key=value configuration file");
    sub_latent->add_option("--bank", latent.bank, "Latent bank FEAT1 file")->required();
    sub_latent->add_option("--k", latent.k, "Number of components");
    sub_latent->add_option("--component", latent.component, "Component varied in the edit grid");
    sub_latent->add_option("--coords", latent.coords, "Coordinates along the component")->delimiter(',');
    sub_latent->add_flag("--relative", latent.relative, "Coordinates are offsets from each sample's own coordinate");
    sub_latent->add_option("--samples", latent.samples, "Bank rows used as grid rows");
    sub_latent->add_option("--out", latent.out_dir, "Output directory")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << records::kVersion << '\n';
        return kOk;
    } catch (const CLI::ParseError& e) {
        error_record(err, "Usage", e.what());
        return kUsage;
    }

    try {
        if (sub_ingest->parsed()) return cmd_ingest(ingest, out);
        if (sub_eval->parsed()) return cmd_eval(eval, out);
        if (sub_report->parsed()) return cmd_report(report, out);
        if (sub_synth->parsed()) return cmd_synth(synth, out);
        if (sub_latent->parsed()) return cmd_latent(latent, out);
    } catch (const Error& e) {
        error_record(err, to_string(e.kind()), e.what());
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        error_record(err, "Internal", e.what());
        return kDataError;
    }
    return kUsage;
}

}  // namespace helio::cli
