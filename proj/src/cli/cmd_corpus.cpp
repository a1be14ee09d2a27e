#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>

#include "commands.hpp"
#include "helio/error.hpp"
#include "helio/fits.hpp"
#include "helio/imageprep.hpp"
#include "helio/random.hpp"

namespace helio::cli {

namespace fs = std::filesystem;

namespace {

bool is_fits_name(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".fits" || ext == ".fit" || ext == ".fts";
}

void write_tile(const imageprep::NormalizedImage& img, const fs::path& stem, const std::string& format) {
    if (format == "htil" || format == "both") imageprep::write_htil(stem.string() + ".htil", img);
    if (format == "png" || format == "both") imageprep::write_png(stem.string() + ".png", imageprep::quantize_u8(img));
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) fail(ErrorKind::IoFailure, "cannot create directory " + dir);
}

}  // namespace

int cmd_ingest(const IngestOptions& o, std::ostream& out) {
    if (!fs::is_directory(o.in_dir)) fail(ErrorKind::IoFailure, o.in_dir + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(o.in_dir)) {
        if (e.is_regular_file() && is_fits_name(e.path())) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) fail(ErrorKind::EmptyInput, "no FITS files in " + o.in_dir);
    if (o.max_dn < 2) fail(ErrorKind::BadMaxDn, "max_dn must be >= 2");
    ensure_dir(o.out_dir);

    records::Json params;
    params["in"] = o.in_dir;
    params["resize"] = o.resize;
    params["max_dn"] = o.max_dn;
    params["normalization"] = o.normalization;
    params["quality_key"] = o.quality_key;
    params["format"] = o.format;
    std::vector<records::Json> recs{records::meta_record("ingest", params)};

    std::size_t kept = 0, rejected = 0;
    for (const auto& path : files) {
        records::Json rec;
        rec["type"] = "file";
        rec["file"] = path.filename().string();
        fits::FitsImage img;
        std::vector<std::string> warnings;
        try {
            img = fits::parse_fits(fits::read_file(path.string()), &warnings);
        } catch (const Error& e) {
            if (classify(e.kind()) != ErrorClass::Data) throw;
            rec["accepted"] = false;
            rec["reason"] = to_string(e.kind());
            recs.push_back(rec);
            ++rejected;
            continue;
        }
        const auto verdict = fits::quality_filter(img, o.quality_key);
        rec["quality"] = verdict.quality_flag;
        rec["accepted"] = verdict.accepted;
        if (!warnings.empty()) rec["warnings"] = warnings;
        if (!verdict.accepted) {
            rec["reason"] = verdict.quality_flag == fits::QualityVerdict::kMissing ? "MissingQuality" : "NonZeroQuality";
            recs.push_back(rec);
            ++rejected;
            continue;
        }

        const auto raw = imageprep::to_raw(img);
        const std::string id = path.stem().string();
        auto norm = o.normalization == "per-image" ? imageprep::normalize_intensity_per_image(raw, id)
                                                   : imageprep::normalize_intensity(raw, o.max_dn, id);
        if (o.resize != 0 && o.resize != norm.width) {
            if (norm.width % o.resize != 0) {
                fail(ErrorKind::NonDivisibleFactor, "--resize " + std::to_string(o.resize) + " does not divide width " +
                                                        std::to_string(norm.width));
            }
            norm = imageprep::downsample_box(norm, norm.width / o.resize);
        }
        write_tile(norm, fs::path(o.out_dir) / id, o.format);
        rec["output"] = id;
        rec["width"] = norm.width;
        rec["height"] = norm.height;
        recs.push_back(rec);
        ++kept;
    }
    records::Json summary;
    summary["type"] = "summary";
    summary["kept"] = kept;
    summary["rejected"] = rejected;
    recs.push_back(summary);
    emit_records((fs::path(o.out_dir) / "manifest.jsonl").string(), recs, out);
    out << "kept=" << kept << " rejected=" << rejected << '\n';
    return 0;
}

int cmd_synth(const SynthOptions& o, std::ostream& out) {
    if (o.count == 0) fail(ErrorKind::Usage, "--count must be at least 1");
    ensure_dir(o.out_dir);
    records::Json params;
    params["count"] = o.count;
    params["resolution"] = o.resolution;
    params["disc_radius"] = o.disc_radius;
    params["loop_density"] = o.loop_density;
    params["holes"] = o.holes;
    params["noise"] = o.noise;
    params["seed"] = o.seed;
    params["format"] = o.format;
    std::vector<records::Json> recs{records::meta_record("synth", params)};
    for (std::size_t i = 0; i < o.count; ++i) {
        imageprep::SynthParams p;
        p.resolution = o.resolution;
        p.disc_radius_frac = o.disc_radius;
        p.loop_density = o.loop_density;
        p.hole_count = o.holes;
        p.noise_scale = o.noise;
        p.seed = derive_seed(o.seed, "synth-" + std::to_string(i));
        auto img = imageprep::synth_sun(p);
        char name[32];
        std::snprintf(name, sizeof name, "synth_%05zu", i);
        img.source_id = name;
        write_tile(img, fs::path(o.out_dir) / name, o.format);
        records::Json rec;
        rec["type"] = "image";
        rec["file"] = name;
        rec["seed"] = p.seed;
        recs.push_back(rec);
    }
    emit_records((fs::path(o.out_dir) / "manifest.jsonl").string(), recs, out);
    out << "wrote " << o.count << " images to " << o.out_dir << '\n';
    return 0;
}

}  // namespace helio::cli
