#include "pack/config.hpp"

#include "pack/toml_lite.hpp"

#include "json.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace pack {
namespace {

namespace fs = std::filesystem;

// %.17g round-trips every double exactly.
std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    std::string s(buf);
    // Bare integers would re-parse as TOML integers; keep reals real.
    if (s.find_first_of(".eEnN") == std::string::npos) s += ".0";
    return s;
}

int get_checked_int(const toml::Table& t, const std::string& key, int fallback) {
    const std::int64_t v = toml::get_int(t, key, fallback);
    if (v < INT32_MIN || v > INT32_MAX)
        throw InputError("key '" + key + "' is out of integer range");
    return static_cast<int>(v);
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "group",
        "polygon",
        "seeds",
        "workers",
        "lattice_bound",
        "output",
        "hyper.gamma0_mu",
        "hyper.gamma0_kappa",
        "hyper.gamma0_D",
        "hyper.c_up",
        "hyper.c_down",
        "hyper.alpha_mu",
        "hyper.alpha_kappa",
        "hyper.alpha_D",
        "hyper.q0_divisor",
        "hyper.fisher_ratio",
        "hyper.beta",
        "hyper.c_epsilon",
        "hyper.iterations",
        "hyper.gibbs_sweeps",
        "hyper.batch_size",
        "hyper.batch_quantum",
        "hyper.quantile_batches",
        "refine.enabled",
        "refine.runs",
        "refine.c_epsilon",
        "refine.iterations",
    };
    return keys;
}

std::string resolve_against(const std::string& base_dir, const std::string& path) {
    if (path.empty() || base_dir.empty()) return path;
    const fs::path p(path);
    if (p.is_absolute()) return path;
    return (fs::path(base_dir) / p).lexically_normal().string();
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::string& origin,
                           const std::string& base_dir) {
    const toml::Table t = toml::parse(text, origin);
    for (const auto& [key, value] : t) {
        if (!known_keys().count(key))
            throw InputError(origin + ":" + std::to_string(value.line) + ": unknown key '" +
                             key + "'");
    }

    RunConfig c;
    c.group = toml::get_text(t, "group", "");
    if (c.group.empty()) throw InputError(origin + ": missing required key 'group'");
    plane_group(c.group);  // validates against the registry, throws UnknownGroup

    c.polygon_path = toml::get_text(t, "polygon", "");
    if (c.polygon_path.empty()) throw InputError(origin + ": missing required key 'polygon'");

    for (const std::int64_t s : toml::get_list(t, "seeds")) {
        if (s < 0) throw InputError(origin + ": seeds must be non-negative");
        c.seeds.push_back(static_cast<std::uint64_t>(s));
    }
    if (c.seeds.empty()) throw InputError(origin + ": 'seeds' must list at least one seed");

    c.workers = get_checked_int(t, "workers", 0);
    if (c.workers < 0) throw InputError(origin + ": 'workers' must be >= 0");

    const std::string bound = toml::get_text(t, "lattice_bound", "twice_diameter");
    if (bound == "twice_diameter") c.bound_rule = LatticeBound::twice_diameter;
    else if (bound == "ops_times_diameter") c.bound_rule = LatticeBound::ops_times_diameter;
    else
        throw InputError(origin + ": lattice_bound must be 'twice_diameter' or "
                                  "'ops_times_diameter', got '" + bound + "'");

    c.output_dir = toml::get_text(t, "output", "out");

    Hyperparams& h = c.hyper;
    h.gamma0_mu = toml::get_real(t, "hyper.gamma0_mu", h.gamma0_mu);
    h.gamma0_kappa = toml::get_real(t, "hyper.gamma0_kappa", h.gamma0_kappa);
    h.gamma0_D = toml::get_real(t, "hyper.gamma0_D", h.gamma0_D);
    h.c_up = toml::get_real(t, "hyper.c_up", h.c_up);
    h.c_down = toml::get_real(t, "hyper.c_down", h.c_down);
    h.alpha_mu = toml::get_real(t, "hyper.alpha_mu", h.alpha_mu);
    h.alpha_kappa = toml::get_real(t, "hyper.alpha_kappa", h.alpha_kappa);
    h.alpha_D = toml::get_real(t, "hyper.alpha_D", h.alpha_D);
    h.q0_divisor = toml::get_real(t, "hyper.q0_divisor", h.q0_divisor);
    h.fisher_ratio = toml::get_real(t, "hyper.fisher_ratio", h.fisher_ratio);
    h.beta = toml::get_real(t, "hyper.beta", h.beta);
    h.c_epsilon = toml::get_real(t, "hyper.c_epsilon", h.c_epsilon);
    h.iterations = get_checked_int(t, "hyper.iterations", h.iterations);
    h.gibbs_sweeps = get_checked_int(t, "hyper.gibbs_sweeps", h.gibbs_sweeps);
    h.batch_size = get_checked_int(t, "hyper.batch_size", h.batch_size);
    h.batch_quantum = get_checked_int(t, "hyper.batch_quantum", h.batch_quantum);
    h.quantile_batches = get_checked_int(t, "hyper.quantile_batches", h.quantile_batches);

    RefineSettings& r = c.refine;
    r.enabled = toml::get_bool(t, "refine.enabled", r.enabled);
    r.runs = get_checked_int(t, "refine.runs", r.runs);
    if (r.runs < 0) throw InputError(origin + ": 'refine.runs' must be >= 0");
    r.c_epsilon = toml::get_real(t, "refine.c_epsilon", r.c_epsilon);
    r.iterations = get_checked_int(t, "refine.iterations", r.iterations);

    c.polygon_path = resolve_against(base_dir, c.polygon_path);
    c.output_dir = resolve_against(base_dir, c.output_dir);
    return c;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string base = fs::path(path).parent_path().string();
    RunConfig c = parse_run_config(buf.str(), path, base);
    if (!fs::exists(c.polygon_path))
        throw InputError(path + ": polygon file does not exist: " + c.polygon_path);
    return c;
}

std::string serialize_run_config(const RunConfig& config) {
    std::ostringstream out;
    out << "group = \"" << config.group << "\"\n";
    out << "polygon = \"" << config.polygon_path << "\"\n";
    out << "seeds = [";
    for (std::size_t i = 0; i < config.seeds.size(); ++i) {
        if (i) out << ", ";
        out << config.seeds[i];
    }
    out << "]\n";
    out << "workers = " << config.workers << "\n";
    out << "lattice_bound = \""
        << (config.bound_rule == LatticeBound::twice_diameter ? "twice_diameter"
                                                              : "ops_times_diameter")
        << "\"\n";
    out << "output = \"" << config.output_dir << "\"\n";

    const Hyperparams& h = config.hyper;
    out << "\n[hyper]\n";
    out << "gamma0_mu = " << num(h.gamma0_mu) << "\n";
    out << "gamma0_kappa = " << num(h.gamma0_kappa) << "\n";
    out << "gamma0_D = " << num(h.gamma0_D) << "\n";
    out << "c_up = " << num(h.c_up) << "\n";
    out << "c_down = " << num(h.c_down) << "\n";
    out << "alpha_mu = " << num(h.alpha_mu) << "\n";
    out << "alpha_kappa = " << num(h.alpha_kappa) << "\n";
    out << "alpha_D = " << num(h.alpha_D) << "\n";
    out << "q0_divisor = " << num(h.q0_divisor) << "\n";
    out << "fisher_ratio = " << num(h.fisher_ratio) << "\n";
    out << "beta = " << num(h.beta) << "\n";
    out << "c_epsilon = " << num(h.c_epsilon) << "\n";
    out << "iterations = " << h.iterations << "\n";
    out << "gibbs_sweeps = " << h.gibbs_sweeps << "\n";
    out << "batch_size = " << h.batch_size << "\n";
    out << "batch_quantum = " << h.batch_quantum << "\n";
    out << "quantile_batches = " << h.quantile_batches << "\n";

    const RefineSettings& r = config.refine;
    out << "\n[refine]\n";
    out << "enabled = " << (r.enabled ? "true" : "false") << "\n";
    out << "runs = " << r.runs << "\n";
    out << "c_epsilon = " << num(r.c_epsilon) << "\n";
    out << "iterations = " << r.iterations << "\n";
    return out.str();
}

ConvexPolygon load_polygon(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open polygon file: " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path + ": not valid JSON: " + e.what());
    }
    if (!doc.is_array())
        throw InputError(path + ": expected a JSON array of [x, y] vertex pairs");
    std::vector<Vec2> vertices;
    for (const auto& entry : doc) {
        if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number() ||
            !entry[1].is_number())
            throw InputError(path + ": each vertex must be a [x, y] number pair");
        vertices.emplace_back(entry[0].get<double>(), entry[1].get<double>());
    }
    return polygon_from_vertices(vertices);
}

}  // namespace pack
