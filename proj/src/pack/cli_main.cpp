// pack: densest plane-group packings of convex polygons.
//
// Subcommands:
//   run <config.toml>              optimize every seed, write run artifacts
//   refine <config.toml> <summary> shrink-box restarts from a prior best
//   inspect <group|polygon.json>   describe a plane group or a shape file
//   render <summary> [--cells K]   re-render a summary as SVG
#include "pack/artifacts.hpp"
#include "pack/config.hpp"
#include "pack/packing.hpp"
#include "pack/parallel.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

namespace fs = std::filesystem;
using namespace pack;

namespace {

// Worker priority: PACK_WORKERS env, then the config, then one per hardware
// thread (WorkerPool treats <= 0 as hardware concurrency).
int effective_workers(int config_workers) {
    if (const char* env = std::getenv("PACK_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (*env == '\0' || *end != '\0' || v <= 0)
            throw InputError(std::string("PACK_WORKERS must be a positive integer, got '") +
                             env + "'");
        return static_cast<int>(v);
    }
    return config_workers;
}

int cmd_run(const std::string& config_path) {
    const RunConfig cfg = load_run_config(config_path);
    const ConvexPolygon polygon = load_polygon(cfg.polygon_path);
    const PlaneGroupDef& group = plane_group(cfg.group);
    const Problem problem = make_problem(group, polygon, cfg.bound_rule);
    const ResolvedHyperparams rp = resolve(cfg.hyper, problem.dimension());
    WorkerPool pool(effective_workers(cfg.workers));

    std::printf("%s: %s in %s, %d variables, batch %d, %d iterations, %zu seed(s)\n",
                config_path.c_str(), fs::path(cfg.polygon_path).filename().string().c_str(),
                cfg.group.c_str(), problem.dimension(), rp.batch_size, cfg.hyper.iterations,
                cfg.seeds.size());
    for (const std::uint64_t seed : cfg.seeds) {
        const RunRecord record = optimize(problem, cfg.hyper, seed, &pool);
        const fs::path dir = fs::path(cfg.output_dir) / std::to_string(seed);
        fs::create_directories(dir);
        write_text_file((dir / "log.csv").string(), log_csv_text(record.rows));
        write_text_file((dir / "summary.json").string(), summary_json_text(problem, rp, record));
        if (record.best.found) {
            const Configuration best = decode_configuration(group, polygon, record.best.design,
                                                            cfg.bound_rule);
            write_text_file((dir / "best.svg").string(), render_svg(best, 5));
        }
        std::printf("seed %llu: best density %.8f (%.1f s) -> %s\n",
                    static_cast<unsigned long long>(seed), record.best.density,
                    record.wall_seconds, dir.string().c_str());
    }
    return 0;
}

int cmd_refine(const std::string& config_path, const std::string& summary_path) {
    const RunConfig cfg = load_run_config(config_path);
    const Summary start = read_summary(summary_path);
    if (!cfg.refine.enabled || cfg.refine.runs == 0) {
        std::printf("refinement disabled (enabled = %s, runs = %d); nothing to do\n",
                    cfg.refine.enabled ? "true" : "false", cfg.refine.runs);
        return 0;
    }
    const PlaneGroupDef& group = plane_group(start.group);
    const ConvexPolygon polygon = polygon_from_vertices(start.polygon_vertices);
    const Problem problem = make_problem(group, polygon, start.bound_rule);
    Hyperparams h = cfg.hyper;
    h.iterations = cfg.refine.iterations;
    h.c_epsilon = cfg.refine.c_epsilon;
    WorkerPool pool(effective_workers(cfg.workers));

    std::printf("refining %s: %d runs of %d iterations, box shrink %.6g, start density %.8f\n",
                summary_path.c_str(), cfg.refine.runs, h.iterations, h.c_epsilon,
                start.best.density);
    const RefineRecord record = refine(problem, h, start.best, cfg.refine.runs, start.seed,
                                       &pool);

    const fs::path dir = fs::path(summary_path).parent_path();
    write_text_file((dir / "refine_log.csv").string(), refine_csv_text(record.best_after_run));

    RunRecord refined;  // summary of the carried-forward best across runs
    refined.best = record.best;
    refined.seed = start.seed;
    double wall = 0.0;
    for (const RunRecord& run : record.runs) wall += run.wall_seconds;
    refined.wall_seconds = wall;
    refined.final_q = record.runs.empty() ? 0.0 : record.runs.back().final_q;
    const ResolvedHyperparams rp = resolve(h, problem.dimension());
    write_text_file((dir / "refined.json").string(), summary_json_text(problem, rp, refined));
    if (record.best.found) {
        const Configuration best = decode_configuration(group, polygon, record.best.design,
                                                        start.bound_rule);
        write_text_file((dir / "refined.svg").string(), render_svg(best, 5));
    }
    std::printf("refinement: best density %.8f after %d runs (%.1f s) -> %s\n",
                record.best.density, cfg.refine.runs, wall,
                (dir / "refined.json").string().c_str());
    return 0;
}

void print_group(const PlaneGroupDef& g) {
    const auto layout = design_layout(g, 1.0);
    std::printf("%s: %zu ops, %s lattice, %zu design variables", g.name.c_str(), g.ops.size(),
                to_string(g.system), layout.size());
    if (!g.extra.empty()) std::printf(", %zu extra constraints", g.extra.size());
    std::printf("\n");
    std::printf("asymmetric unit: c1 in [0, %g), c2 in [0, %g)\n", g.c1_max, g.c2_max);
    std::printf("ops (fractional coordinates):\n");
    for (std::size_t k = 0; k < g.ops.size(); ++k) {
        const auto& op = g.ops[k];
        std::printf("  %2zu: M = [[%2d, %2d], [%2d, %2d]], t = (%g, %g)\n", k + 1, op.M(0, 0),
                    op.M(0, 1), op.M(1, 0), op.M(1, 1), op.t.x(), op.t.y());
    }
    std::printf("design layout (for unit circumdiameter, default lattice bound):\n");
    for (const VarSpec& v : layout)
        std::printf("  %-8s in [%g, %g] %s\n", v.name, v.lo, v.hi,
                    v.periodic ? "periodic" : "folded");
}

int cmd_inspect(const std::string& target) {
    const auto& names = plane_group_names();
    if (std::find(names.begin(), names.end(), target) != names.end()) {
        print_group(plane_group(target));
        return 0;
    }
    if (!fs::exists(target)) {
        std::string known;
        for (const std::string& n : names) known += (known.empty() ? "" : ", ") + n;
        throw InputError("unknown group or polygon file: '" + target + "' (known groups: " +
                         known + ")");
    }
    const ConvexPolygon poly = load_polygon(target);
    const Eigen::Index n = poly.vertices.rows();
    std::printf("%s: %lld vertices, area %.4f, circumdiameter %.4f\n", target.c_str(),
                static_cast<long long>(n), polygon_area(poly), poly.circumdiameter);
    std::printf("edge lengths:");
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vec2 e = (poly.vertices.row((i + 1) % n) - poly.vertices.row(i)).transpose();
        std::printf(" %.4f", e.norm());
    }
    std::printf("\n");
    return 0;
}

int cmd_render(const std::string& summary_path, int cells, std::string out_path) {
    const Summary s = read_summary(summary_path);
    if (!s.best.found)
        throw InputError(summary_path + ": summary holds no feasible design to render");
    const PlaneGroupDef& group = plane_group(s.group);
    const ConvexPolygon polygon = polygon_from_vertices(s.polygon_vertices);
    const Configuration cfg = decode_configuration(group, polygon, s.best.design, s.bound_rule);
    if (out_path.empty())
        out_path = (fs::path(summary_path).parent_path() / "render.svg").string();
    write_text_file(out_path, render_svg(cfg, cells));
    std::printf("wrote %s (%d x %d cells, density %.8f)\n", out_path.c_str(), cells, cells,
                packing_density(cfg));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Densest plane-group packings of convex polygons"};
    app.require_subcommand(1);

    std::string config_path, summary_path, target, out_path;
    int cells = 5;

    CLI::App* run = app.add_subcommand("run", "Optimize every seed in a config");
    run->add_option("config", config_path, "TOML run configuration")->required();

    CLI::App* refine = app.add_subcommand("refine", "Shrink-box restarts from a summary");
    refine->add_option("config", config_path, "TOML run configuration")->required();
    refine->add_option("summary", summary_path, "summary.json of the starting run")->required();

    CLI::App* inspect = app.add_subcommand("inspect", "Describe a plane group or shape file");
    inspect->add_option("target", target, "plane-group name or polygon JSON path")->required();

    CLI::App* render = app.add_subcommand("render", "Render a summary as SVG");
    render->add_option("summary", summary_path, "summary.json to render")->required();
    render->add_option("--cells", cells, "cells per axis")->check(CLI::PositiveNumber);
    render->add_option("--out", out_path, "output SVG path (default: render.svg beside the summary)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (run->parsed()) return cmd_run(config_path);
        if (refine->parsed()) return cmd_refine(config_path, summary_path);
        if (inspect->parsed()) return cmd_inspect(target);
        if (render->parsed()) return cmd_render(summary_path, cells, out_path);
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 2;
    } catch (const InputError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
