// Run artifacts: iteration logs (CSV), run summaries (JSON, self-contained
// enough to re-render or refine without the original config), refinement
// trajectories (CSV), and plain file IO helpers.
#pragma once

#include "pack/optimizer.hpp"

#include <string>
#include <vector>

namespace pack {

inline constexpr const char* kLogCsvHeader =
    "iter,mean_density,max_density,best_density,q,feasible_frac,lambda_min,"
    "step_norm_mu,step_norm_kappa,step_norm_D";

// Header plus one row per iteration, doubles at full %.17g precision so the
// log is byte-reproducible for a fixed seed.
std::string log_csv_text(const std::vector<LogRow>& rows);

// Refinement trajectory: header "run,best_density", one row per run with the
// carried-forward best.
std::string refine_csv_text(const std::vector<double>& best_after_run);

// The summary embeds the exact polygon and design box context so `refine`
// and `render` can rebuild the configuration from this one file.
std::string summary_json_text(const Problem& problem, const ResolvedHyperparams& rp,
                              const RunRecord& record);

// What later commands need back out of a summary.
struct Summary {
    std::string group;
    std::vector<Vec2> polygon_vertices;
    LatticeBound bound_rule = LatticeBound::twice_diameter;
    std::uint64_t seed = 0;
    Solution best;
};

Summary read_summary(const std::string& path);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace pack
