#include "sdec/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

namespace sdec {

namespace {

using nlohmann::json;

void require_keys(const json& j, const std::string& where,
                  const std::set<std::string>& allowed) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key)) throw ConfigError(where + ": unknown key \"" + key + "\"");
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("bad value for \"" + key + "\": " + e.what());
    }
}

void parse_theta_solver(const json& j, ThetaSolverConfig& cfg) {
    require_keys(j, "theta_solver",
                 {"global_evals", "local_evals", "population", "rel_tol"});
    cfg.global_evals = get_or(j, "global_evals", cfg.global_evals);
    cfg.local_evals = get_or(j, "local_evals", cfg.local_evals);
    cfg.population = get_or(j, "population", cfg.population);
    cfg.rel_tol = get_or(j, "rel_tol", cfg.rel_tol);
    cfg.validate();
}

void parse_qp(const json& j, QpConfig& cfg) {
    require_keys(j, "qp",
                 {"grad_tol", "max_iters", "bb_min", "bb_max", "nonmonotone_window", "armijo"});
    cfg.grad_tol = get_or(j, "grad_tol", cfg.grad_tol);
    cfg.max_iters = get_or(j, "max_iters", cfg.max_iters);
    cfg.bb_min = get_or(j, "bb_min", cfg.bb_min);
    cfg.bb_max = get_or(j, "bb_max", cfg.bb_max);
    cfg.nonmonotone_window = get_or(j, "nonmonotone_window", cfg.nonmonotone_window);
    cfg.armijo = get_or(j, "armijo", cfg.armijo);
    if (!(cfg.grad_tol > 0.0) || cfg.max_iters == 0)
        throw ConfigError("qp: grad_tol must be positive and max_iters nonzero");
}

} // namespace

std::vector<double> Eps2Grid::values() const {
    if (points == 0) throw ConfigError("scan.eps2_grid: needs at least one point");
    if (!(lo > 0.0) && log_scale) throw ConfigError("scan.eps2_grid: log grid needs lo > 0");
    if (!(lo <= hi)) throw ConfigError("scan.eps2_grid: lo must not exceed hi");
    std::vector<double> v(points);
    if (points == 1) {
        v[0] = lo;
        return v;
    }
    for (std::size_t i = 0; i < points; ++i) {
        const double s = static_cast<double>(i) / static_cast<double>(points - 1);
        v[i] = log_scale ? std::exp(std::log(lo) + s * (std::log(hi) - std::log(lo)))
                         : lo + s * (hi - lo);
    }
    v.front() = lo;
    v.back() = hi;
    return v;
}

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    require_keys(j, "config",
                 {"model", "output_dir", "data", "threads", "generate", "cluster", "subspace",
                  "theta_solver", "qp", "scan", "closure"});

    RunConfig cfg;
    cfg.model = get_or<std::string>(j, "model", cfg.model);
    builtin_by_id(cfg.model); // validates the identifier
    cfg.output_dir = get_or<std::string>(j, "output_dir", cfg.output_dir);
    cfg.data = get_or<std::string>(j, "data", cfg.data);
    cfg.threads = get_or<std::size_t>(j, "threads", cfg.threads);

    if (j.contains("generate")) {
        const json& g = j.at("generate");
        require_keys(g, "generate",
                     {"example", "n", "dt", "dt_internal", "T_c", "b0", "seed", "stem"});
        cfg.generate.example = get_or<std::string>(g, "example", cfg.generate.example);
        cfg.generate.n = get_or<std::size_t>(g, "n", cfg.generate.n);
        cfg.generate.dt = get_or<double>(g, "dt", cfg.generate.dt);
        cfg.generate.dt_internal = get_or<double>(g, "dt_internal", cfg.generate.dt_internal);
        cfg.generate.T_c = get_or<double>(g, "T_c", cfg.generate.T_c);
        cfg.generate.b0 = get_or<double>(g, "b0", cfg.generate.b0);
        cfg.generate.seed = get_or<std::uint64_t>(g, "seed", cfg.generate.seed);
        cfg.generate.stem = get_or<std::string>(g, "stem", cfg.generate.stem);
    }

    if (j.contains("cluster")) {
        const json& c = j.at("cluster");
        require_keys(c, "cluster", {"K", "eps2", "write_fitness"});
        cfg.cluster.k = get_or<std::size_t>(c, "K", cfg.cluster.k);
        cfg.cluster.eps2 = get_or<double>(c, "eps2", cfg.cluster.eps2);
        cfg.cluster.write_fitness = get_or<bool>(c, "write_fitness", cfg.cluster.write_fitness);
        if (cfg.cluster.k < 1) throw ConfigError("cluster.K must be at least 1");
        if (cfg.cluster.eps2 < 0.0) throw ConfigError("cluster.eps2 must be nonnegative");
    }

    if (j.contains("subspace")) {
        const json& s = j.at("subspace");
        require_keys(s, "subspace",
                     {"alpha", "max_iters", "tol", "n_restarts", "seed", "round_trip"});
        cfg.subspace.alpha = get_or<double>(s, "alpha", cfg.subspace.alpha);
        cfg.subspace.max_iters = get_or<std::size_t>(s, "max_iters", cfg.subspace.max_iters);
        cfg.subspace.tol = get_or<double>(s, "tol", cfg.subspace.tol);
        cfg.subspace.n_restarts = get_or<int>(s, "n_restarts", cfg.subspace.n_restarts);
        cfg.subspace.seed = get_or<std::uint64_t>(s, "seed", cfg.subspace.seed);
        cfg.subspace.round_trip = get_or<bool>(s, "round_trip", cfg.subspace.round_trip);
        if (!(cfg.subspace.alpha > 0.0 && cfg.subspace.alpha <= 1.0))
            throw ConfigError("subspace.alpha must lie in (0, 1]");
        if (!(cfg.subspace.tol > 0.0)) throw ConfigError("subspace.tol must be positive");
        if (cfg.subspace.max_iters == 0) throw ConfigError("subspace.max_iters must be nonzero");
    }

    if (j.contains("theta_solver")) parse_theta_solver(j.at("theta_solver"), cfg.subspace.theta);
    if (j.contains("qp")) parse_qp(j.at("qp"), cfg.subspace.qp);

    if (j.contains("scan")) {
        const json& s = j.at("scan");
        require_keys(s, "scan",
                     {"mode", "eps2_grid", "k_values", "replicates", "gap_eps2", "k_for_eps2"});
        cfg.scan.mode = get_or<std::string>(s, "mode", cfg.scan.mode);
        if (cfg.scan.mode != "eps2" && cfg.scan.mode != "k" && cfg.scan.mode != "both")
            throw ConfigError("scan.mode must be \"eps2\", \"k\" or \"both\"");
        if (s.contains("eps2_grid")) {
            const json& g = s.at("eps2_grid");
            require_keys(g, "scan.eps2_grid", {"lo", "hi", "points", "log"});
            cfg.scan.eps2_grid.lo = get_or<double>(g, "lo", cfg.scan.eps2_grid.lo);
            cfg.scan.eps2_grid.hi = get_or<double>(g, "hi", cfg.scan.eps2_grid.hi);
            cfg.scan.eps2_grid.points = get_or<std::size_t>(g, "points", cfg.scan.eps2_grid.points);
            cfg.scan.eps2_grid.log_scale = get_or<bool>(g, "log", cfg.scan.eps2_grid.log_scale);
        }
        cfg.scan.eps2_grid.values(); // validates
        cfg.scan.k_values = get_or<std::vector<std::size_t>>(s, "k_values", cfg.scan.k_values);
        if (cfg.scan.k_values.empty()) throw ConfigError("scan.k_values must not be empty");
        for (std::size_t k : cfg.scan.k_values)
            if (k < 2) throw ConfigError("scan.k_values entries must be >= 2");
        cfg.scan.replicates = get_or<int>(s, "replicates", cfg.scan.replicates);
        if (cfg.scan.replicates < 1) throw ConfigError("scan.replicates must be >= 1");
        cfg.scan.gap_eps2 = get_or<double>(s, "gap_eps2", cfg.scan.gap_eps2);
        cfg.scan.k_for_eps2 = get_or<std::size_t>(s, "k_for_eps2", cfg.scan.k_for_eps2);
    }

    if (j.contains("closure")) {
        const json& c = j.at("closure");
        require_keys(c, "closure",
                     {"degrees", "aux_index_per_param", "substeps", "seed", "x0",
                      "min_occupancy", "histogram_bins"});
        cfg.closure.degrees = get_or<std::vector<int>>(c, "degrees", cfg.closure.degrees);
        cfg.closure.aux_index_per_param =
            get_or<std::vector<int>>(c, "aux_index_per_param", cfg.closure.aux_index_per_param);
        cfg.closure.substeps = get_or<int>(c, "substeps", cfg.closure.substeps);
        cfg.closure.seed = get_or<std::uint64_t>(c, "seed", cfg.closure.seed);
        cfg.closure.x0 = get_or<double>(c, "x0", cfg.closure.x0);
        cfg.closure.min_occupancy = get_or<double>(c, "min_occupancy", cfg.closure.min_occupancy);
        cfg.closure.histogram_bins = get_or<int>(c, "histogram_bins", cfg.closure.histogram_bins);
        if (cfg.closure.substeps < 1) throw ConfigError("closure.substeps must be >= 1");
    }

    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file " + path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return parse_config(text);
}

} // namespace sdec
