#include "pack/artifacts.hpp"

#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace pack {
namespace {

using ordered_json = nlohmann::ordered_json;

void append_num(std::string& out, double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    out += buf;
}

const char* bound_name(LatticeBound b) {
    return b == LatticeBound::twice_diameter ? "twice_diameter" : "ops_times_diameter";
}

}  // namespace

std::string log_csv_text(const std::vector<LogRow>& rows) {
    std::string out(kLogCsvHeader);
    out += '\n';
    for (const LogRow& r : rows) {
        out += std::to_string(r.iter);
        for (const double v : {r.mean_density, r.max_density, r.best_density, r.q,
                               r.feasible_frac, r.lambda_min, r.step_norm_mu,
                               r.step_norm_kappa, r.step_norm_D}) {
            out += ',';
            append_num(out, v);
        }
        out += '\n';
    }
    return out;
}

std::string refine_csv_text(const std::vector<double>& best_after_run) {
    std::string out("run,best_density\n");
    for (std::size_t i = 0; i < best_after_run.size(); ++i) {
        out += std::to_string(i + 1);
        out += ',';
        append_num(out, best_after_run[i]);
        out += '\n';
    }
    return out;
}

std::string summary_json_text(const Problem& problem, const ResolvedHyperparams& rp,
                              const RunRecord& record) {
    ordered_json doc;
    ordered_json poly = ordered_json::array();
    for (Eigen::Index i = 0; i < problem.polygon.vertices.rows(); ++i)
        poly.push_back({problem.polygon.vertices(i, 0), problem.polygon.vertices(i, 1)});
    doc["problem"] = {{"group", problem.group->name},
                      {"polygon", std::move(poly)},
                      {"lattice_bound", bound_name(problem.bound_rule)}};

    const Hyperparams& h = rp.h;
    doc["hyperparams"] = {{"batch_size", rp.batch_size},
                          {"q0", rp.q0},
                          {"beta", rp.beta},
                          {"iterations", h.iterations},
                          {"gibbs_sweeps", h.gibbs_sweeps},
                          {"gamma0_mu", h.gamma0_mu},
                          {"gamma0_kappa", h.gamma0_kappa},
                          {"gamma0_D", h.gamma0_D},
                          {"c_up", h.c_up},
                          {"c_down", h.c_down},
                          {"alpha_mu", h.alpha_mu},
                          {"alpha_kappa", h.alpha_kappa},
                          {"alpha_D", h.alpha_D},
                          {"q0_divisor", h.q0_divisor},
                          {"fisher_ratio", h.fisher_ratio},
                          {"c_epsilon", h.c_epsilon},
                          {"quantile_batches", h.quantile_batches}};

    doc["seed"] = record.seed;
    ordered_json design = ordered_json::array();
    for (Eigen::Index i = 0; i < record.best.design.size(); ++i)
        design.push_back(record.best.design(i));
    doc["best"] = {{"found", record.best.found},
                   {"density", record.best.density},
                   {"violation", record.best.violation},
                   {"design", std::move(design)}};
    doc["final_q"] = record.final_q;
    doc["wall_seconds"] = record.wall_seconds;
    return doc.dump(2) + "\n";
}

Summary read_summary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open summary file: " + path);
    ordered_json doc;
    try {
        doc = ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path + ": not valid JSON: " + e.what());
    }
    try {
        Summary s;
        s.group = doc.at("problem").at("group").get<std::string>();
        for (const auto& v : doc.at("problem").at("polygon"))
            s.polygon_vertices.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
        const std::string bound = doc.at("problem").at("lattice_bound").get<std::string>();
        if (bound == "twice_diameter") s.bound_rule = LatticeBound::twice_diameter;
        else if (bound == "ops_times_diameter") s.bound_rule = LatticeBound::ops_times_diameter;
        else throw InputError(path + ": unknown lattice_bound '" + bound + "'");
        s.seed = doc.at("seed").get<std::uint64_t>();
        const auto& best = doc.at("best");
        s.best.found = best.at("found").get<bool>();
        s.best.density = best.at("density").get<double>();
        s.best.violation = best.at("violation").get<double>();
        const auto& design = best.at("design");
        s.best.design.resize(static_cast<Eigen::Index>(design.size()));
        for (std::size_t i = 0; i < design.size(); ++i)
            s.best.design(static_cast<Eigen::Index>(i)) = design[i].get<double>();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path + ": summary is missing fields: " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write file: " + path);
    out << text;
    if (!out.flush()) throw InputError("failed while writing file: " + path);
}

}  // namespace pack
