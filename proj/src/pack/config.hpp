// Run configuration files (TOML) and polygon shape files (JSON): parsing,
// validation, and a canonical serialization whose round-trip is exact.
#pragma once

#include "pack/optimizer.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pack {

struct RefineSettings {
    bool enabled = false;
    int runs = 0;
    double c_epsilon = 1.2;  // per-run box shrink factor
    int iterations = 2000;   // per refinement run
};

// One experiment: which group and polygon, how to run, and where to write.
// polygon_path and output_dir are resolved against the config file's
// directory when loaded from disk. Unknown keys are an InputError so typos
// in hyperparameter overrides cannot silently fall back to defaults.
struct RunConfig {
    std::string group;
    std::string polygon_path;
    std::vector<std::uint64_t> seeds;
    int workers = 0;  // 0 = one worker per hardware thread
    LatticeBound bound_rule = LatticeBound::twice_diameter;
    Hyperparams hyper;
    RefineSettings refine;
    std::string output_dir = "out";
};

RunConfig parse_run_config(const std::string& text, const std::string& origin,
                           const std::string& base_dir);
RunConfig load_run_config(const std::string& path);

// Canonical TOML emission: every field explicit, numbers at full precision,
// so parse(serialize(c)) reproduces c exactly.
std::string serialize_run_config(const RunConfig& config);

// JSON array of [x, y] vertex pairs. The polygon is recentered on its
// centroid and ordered counterclockwise like every other construction path.
ConvexPolygon load_polygon(const std::string& path);

}  // namespace pack
