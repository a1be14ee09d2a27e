#include <algorithm>
#include <cmath>

#include "helio/error.hpp"
#include "helio/metrics.hpp"

namespace helio::metrics {

namespace {

bool is_frechet_family(std::string_view name) {
    return name == "FID" || name == "rFID" || name == "CLIP-FID" || name.starts_with("FID-p") || name.ends_with("-FD") ||
           name.starts_with("FD[");
}

}  // namespace

void MetricReport::set(std::string_view name, double value) {
    for (auto& [k, v] : values) {
        if (k == name) {
            v = value;
            return;
        }
    }
    values.emplace_back(std::string(name), value);
}

std::optional<double> MetricReport::get(std::string_view name) const {
    for (const auto& [k, v] : values) {
        if (k == name) return v;
    }
    return std::nullopt;
}

void validate(MetricReport& report) {
    for (auto& [name, value] : report.values) {
        if (!std::isfinite(value)) fail(ErrorKind::InvariantViolation, name + " is not finite");
        if (name == "precision" || name == "recall") {
            if (value < 0.0 || value > 1.0) fail(ErrorKind::InvariantViolation, name + " outside [0, 1]");
        } else if (is_frechet_family(name) && value < 0.0) {
            if (value < -kNegativeClamp) fail(ErrorKind::InvariantViolation, name + " is negative");
            value = 0.0;
        }
    }
}

std::string frechet_label(std::string_view id) {
    const bool imagenet = id.find("imagenet") != std::string_view::npos;
    if (id.starts_with("inception-v3-pool3")) return "FID";
    if (id.starts_with("inception-random")) return "rFID";
    if (id.starts_with("clip")) return "CLIP-FID";
    if (id.starts_with("mae")) return imagenet || id.starts_with("mae-in") ? "MAE-IN-FD" : "MAE-SOL-FD";
    if (id.starts_with("vicreg")) return imagenet || id.starts_with("vicreg-in") ? "VIC-IN-FD" : "VIC-SOL-FD";
    return "FD[" + std::string(id) + "]";
}

}  // namespace helio::metrics
