#include <algorithm>
#include <filesystem>
#include <iostream>

#include "commands.hpp"
#include "helio/error.hpp"
#include "helio/featstore.hpp"
#include "helio/latentlab.hpp"

namespace helio::cli {

namespace fs = std::filesystem;

namespace {

std::vector<float> to_floats(const Eigen::VectorXd& v) {
    std::vector<float> out(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(i)] = static_cast<float>(v[i]);
    return out;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

int cmd_latent(const LatentOptions& o, std::ostream& out) {
    if (o.coords.empty()) fail(ErrorKind::Usage, "--coords is empty");
    const auto features = featstore::load(o.bank);
    const auto bank = latentlab::from_features(features);
    if (latentlab::underdetermined(bank)) {
        std::cerr << "warning: " << bank.vectors.rows() << " samples in " << bank.vectors.cols()
                  << " dimensions; directions beyond rank n-1 are undefined\n";
    }
    const auto dirs = latentlab::pca(bank, o.k);
    if (o.component >= o.k) fail(ErrorKind::BadComponent, "--component must be below --k");

    std::error_code ec;
    fs::create_directories(o.out_dir, ec);
    if (!fs::is_directory(o.out_dir)) fail(ErrorKind::IoFailure, "cannot create " + o.out_dir);

    featstore::FeatureSet dfs;
    dfs.extractor_id = bank.space_id + "-pca";
    dfs.dim = static_cast<std::uint32_t>(dirs.components.cols());
    for (Eigen::Index i = 0; i < dirs.components.rows(); ++i) {
        dfs.push_back("pc" + std::to_string(i), to_floats(dirs.components.row(i).transpose()));
    }
    featstore::save(dfs, (fs::path(o.out_dir) / "directions.feat").string());

    records::Json params;
    params["bank"] = o.bank;
    params["k"] = o.k;
    params["component"] = o.component;
    params["coords"] = o.coords;
    params["relative"] = o.relative;
    params["samples"] = o.samples;
    records::Json sidecar;
    sidecar["type"] = "pca";
    sidecar["space_id"] = dirs.space_id;
    sidecar["n"] = bank.vectors.rows();
    sidecar["w"] = bank.vectors.cols();
    sidecar["eigenvalues"] = to_vector(dirs.eigenvalues);
    sidecar["total_variance"] = dirs.total_variance;
    sidecar["reconstruction_error"] = latentlab::reconstruction_error(bank, dirs, o.k);
    sidecar["mean"] = to_vector(dirs.mean);
    emit_records((fs::path(o.out_dir) / "directions.jsonl").string(), {records::meta_record("latent", params), sidecar},
                 out);

    // Grid rows are bank samples, columns the requested coordinates.
    const std::size_t rows = std::min<std::size_t>(o.samples, static_cast<std::size_t>(bank.vectors.rows()));
    featstore::FeatureSet grid;
    grid.extractor_id = bank.space_id;
    grid.dim = features.dim;
    for (std::size_t s = 0; s < rows; ++s) {
        const Eigen::VectorXd base = bank.vectors.row(static_cast<Eigen::Index>(s)).transpose();
        std::vector<double> coords = o.coords;
        if (o.relative) {
            const double own = latentlab::project(dirs, base)[static_cast<Eigen::Index>(o.component)];
            for (double& c : coords) c += own;
        }
        const auto edits = latentlab::edit_sequence(dirs, base, o.component, coords);
        for (std::size_t j = 0; j < edits.size(); ++j) {
            grid.push_back(features.sample_ids[s] + "@" + std::to_string(j), to_floats(edits[j]));
        }
    }
    featstore::save(grid, (fs::path(o.out_dir) / "grid.feat").string());

    out << "k=" << o.k << " explained=";
    const double explained = dirs.total_variance > 0 ? dirs.eigenvalues.sum() / dirs.total_variance : 0.0;
    out << explained << " grid=" << rows << "x" << o.coords.size() << '\n';
    return 0;
}

}  // namespace helio::cli
