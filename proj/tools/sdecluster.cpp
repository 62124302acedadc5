// Command-line front end: dataset generation, regime clustering,
// hyperparameter scans, closure fitting and closed-system simulation.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "sdec/config.hpp"
#include "sdec/io.hpp"
#include "sdec/parallel.hpp"

namespace {

namespace fs = std::filesystem;
using namespace sdec;

constexpr int kExitOk = 0;
constexpr int kExitNumeric = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNoConvergence = 3;

struct GlobalArgs {
    std::string config_path;
    std::string out_override;
    long long seed_override = -1;
    long long threads = -1;
};

RunConfig prepare(const GlobalArgs& args) {
    RunConfig cfg = load_config(args.config_path);
    if (!args.out_override.empty()) cfg.output_dir = args.out_override;
    if (args.seed_override >= 0) {
        cfg.generate.seed = static_cast<std::uint64_t>(args.seed_override);
        cfg.subspace.seed = static_cast<std::uint64_t>(args.seed_override);
        cfg.closure.seed = static_cast<std::uint64_t>(args.seed_override);
    }
    if (args.threads >= 0) cfg.threads = static_cast<std::size_t>(args.threads);
    if (cfg.threads > 0) set_thread_budget(cfg.threads);
    fs::create_directories(cfg.output_dir);
    return cfg;
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
    return (fs::path(cfg.output_dir) / name).string();
}

LoadedDataset load_data(const RunConfig& cfg) {
    if (cfg.data.empty()) throw ConfigError("config: \"data\" path required for this command");
    return read_dataset_csv(cfg.data);
}

int cmd_generate(const RunConfig& cfg) {
    ExampleConfig ecfg;
    ecfg.n = cfg.generate.n;
    ecfg.dt_out = cfg.generate.dt;
    ecfg.dt_internal = cfg.generate.dt_internal;
    ecfg.T_c = cfg.generate.T_c;
    ecfg.b0 = cfg.generate.b0;
    ecfg.seed = cfg.generate.seed;
    const SyntheticDataset ds = generate_example(cfg.generate.example, ecfg);
    const std::string stem =
        cfg.generate.stem.empty() ? cfg.generate.example : cfg.generate.stem;
    const std::string csv = write_dataset(cfg.output_dir, stem, ds);
    std::printf("dataset %s: model=%s N=%zu dt=%g seed=%llu aux=%zu clamped=%llu\n", csv.c_str(),
                ds.model_id.c_str(), ds.x.size(), ds.x.dt,
                static_cast<unsigned long long>(ds.seed), ds.aux.size(),
                static_cast<unsigned long long>(ds.theta_clamped));
    return kExitOk;
}

int cmd_cluster(const RunConfig& cfg) {
    const SdeModelSpec model = builtin_by_id(cfg.model);
    const LoadedDataset data = load_data(cfg);
    const ClusteringResult res =
        run_subspace(model, data.x, cfg.cluster.k, cfg.cluster.eps2, cfg.subspace);

    write_clustering_json(out_path(cfg, "cluster_result.json"), res, cfg.model,
                          cfg.subspace.alpha);
    write_gamma_csv(out_path(cfg, "gamma.csv"), res.gamma_fine, data.x.t0, data.x.dt);
    write_theta_path_csv(out_path(cfg, "theta_path.csv"), reconstruct_theta_path(res), data.x.t0,
                         data.x.dt);
    if (cfg.cluster.write_fitness) {
        const FitnessMatrix fm = fitness_matrix(model, data.x, res.theta);
        write_fitness_csv(out_path(cfg, "fitness.csv"), fm);
    }
    std::printf("clustered K=%zu eps2=%g: functional=%.10g iterations=%zu converged=%s\n",
                res.n_clusters, res.eps2, res.final_functional(), res.iterations,
                res.converged ? "yes" : "no");
    return res.converged ? kExitOk : kExitNoConvergence;
}

int cmd_scan(const RunConfig& cfg) {
    const SdeModelSpec model = builtin_by_id(cfg.model);
    const LoadedDataset data = load_data(cfg);
    double recommended_eps2 = cfg.scan.gap_eps2;

    if (cfg.scan.mode == "eps2" || cfg.scan.mode == "both") {
        const std::size_t k = cfg.scan.k_for_eps2 > 0 ? cfg.scan.k_for_eps2 : cfg.cluster.k;
        const std::vector<double> grid = cfg.scan.eps2_grid.values();
        const std::vector<ClusteringResult> results =
            scan_eps2(model, data.x, k, grid, cfg.subspace);
        const EnergyCurve curve = select_eps2(results, data.x.dt);
        write_energy_csv(out_path(cfg, "energy_curve.csv"), curve);
        std::printf("recommended eps2 = %g (K=%zu, %zu grid points)\n", curve.recommended_eps2,
                    k, grid.size());
        if (recommended_eps2 <= 0.0) recommended_eps2 = curve.recommended_eps2;
    }

    if (cfg.scan.mode == "k" || cfg.scan.mode == "both") {
        GapStatisticConfig gcfg;
        gcfg.eps2 = recommended_eps2 > 0.0 ? recommended_eps2 : cfg.cluster.eps2;
        gcfg.replicates = cfg.scan.replicates;
        gcfg.subspace = cfg.subspace;
        const DiversityReport rep = gap_statistic(model, data.x, cfg.scan.k_values, gcfg);
        write_gap_csv(out_path(cfg, "gap_report.csv"), rep);
        for (const auto& fmsg : rep.failures)
            std::fprintf(stderr, "reference run failed: %s\n", fmsg.c_str());
        std::printf("recommended K = %zu (eps2=%g, B=%d)\n", rep.recommended_k, gcfg.eps2,
                    gcfg.replicates);
    }
    return kExitOk;
}

// Density-normalized histogram of `samples` over [lo, hi].
std::vector<double> histogram_density(const std::vector<double>& samples, double lo, double hi,
                                      int bins) {
    std::vector<double> h(static_cast<std::size_t>(bins), 0.0);
    if (samples.empty() || !(hi > lo)) return h;
    const double w = (hi - lo) / bins;
    for (double v : samples) {
        int b = static_cast<int>((v - lo) / w);
        b = std::min(std::max(b, 0), bins - 1);
        h[static_cast<std::size_t>(b)] += 1.0;
    }
    const double norm = 1.0 / (static_cast<double>(samples.size()) * w);
    for (double& v : h) v *= norm;
    return h;
}

int cmd_closure(const RunConfig& cfg, bool simulate_only) {
    const SdeModelSpec model = builtin_by_id(cfg.model);
    const LoadedDataset data = load_data(cfg);
    if (data.aux.empty())
        throw ConfigError("closure: dataset has no auxiliary series column");

    ClosureFit fit;
    ClusteringResult res;
    if (simulate_only) {
        fit = read_closure_json(out_path(cfg, "closure.json"));
    } else {
        res = read_clustering_json(out_path(cfg, "cluster_result.json"),
                                   out_path(cfg, "gamma.csv"));
        std::vector<int> degrees = cfg.closure.degrees;
        if (degrees.empty()) degrees.assign(static_cast<std::size_t>(model.n_params), 1);
        std::vector<int> aux_idx = cfg.closure.aux_index_per_param;
        if (aux_idx.empty()) aux_idx.assign(static_cast<std::size_t>(model.n_params), 0);
        fit = fit_closure(res, data.aux, aux_idx, degrees, cfg.closure.min_occupancy);
        write_closure_json(out_path(cfg, "closure.json"), fit);
    }

    ClosedSimConfig scfg;
    scfg.x0 = cfg.closure.x0;
    scfg.substeps = cfg.closure.substeps;
    scfg.seed = cfg.closure.seed;
    ClosedSimStats stats;
    const UniformTimeSeries sim = simulate_closed(model, fit, data.aux, scfg, &stats);
    const std::string sim_name = simulate_only ? "simulation.csv" : "prediction.csv";
    write_dataset_csv(out_path(cfg, sim_name), sim, {});
    if (stats.theta_clamped > 0)
        std::fprintf(stderr, "warning: %llu parameter evaluations clamped into bounds\n",
                     static_cast<unsigned long long>(stats.theta_clamped));
    if (stats.state_reflected > 0)
        std::fprintf(stderr, "warning: %llu states reflected at the domain boundary\n",
                     static_cast<unsigned long long>(stats.state_reflected));

    if (!simulate_only) {
        std::printf("closure fitted: %zu parameters, residual rms", fit.scaling.size());
        for (double r : fit.residual_rms) std::printf(" %.4g", r);
        std::printf("\n");

        if (cfg.closure.histogram_bins > 0) {
            // Hard labels from the affiliations; per-cluster densities of the
            // training data, the closed simulation and the invariant law.
            const std::size_t n = res.gamma_fine.grid_len;
            std::vector<std::size_t> label(n, 0);
            for (std::size_t i = 0; i < n; ++i) {
                double best = -1.0;
                for (std::size_t c = 0; c < res.n_clusters; ++c)
                    if (res.gamma_fine.weights[c][i] > best) {
                        best = res.gamma_fine.weights[c][i];
                        label[i] = c;
                    }
            }
            for (std::size_t c = 0; c < res.n_clusters; ++c) {
                std::vector<double> train, pred;
                for (std::size_t i = 0; i < n; ++i)
                    if (label[i] == c) {
                        train.push_back(data.x.values[i]);
                        pred.push_back(sim.values[i]);
                    }
                if (train.size() < 2) continue;
                const auto [mn, mx] = std::minmax_element(train.begin(), train.end());
                const double lo = *mn, hi = *mx;
                const int bins = cfg.closure.histogram_bins;
                const auto ht = histogram_density(train, lo, hi, bins);
                const auto hp = histogram_density(pred, lo, hi, bins);
                std::vector<double> centers(static_cast<std::size_t>(bins));
                std::vector<double> grid(static_cast<std::size_t>(bins));
                for (int b = 0; b < bins; ++b)
                    grid[static_cast<std::size_t>(b)] = centers[static_cast<std::size_t>(b)] =
                        lo + (b + 0.5) * (hi - lo) / bins;
                const std::vector<double> pstar =
                    stationary_density(model, res.theta[c], grid, static_cast<int>(c));
                std::ofstream f(out_path(cfg, "hist_cluster_" + std::to_string(c + 1) + ".csv"));
                f << "x,training_density,simulated_density,stationary_density\n";
                for (int b = 0; b < bins; ++b)
                    f << centers[static_cast<std::size_t>(b)] << ','
                      << ht[static_cast<std::size_t>(b)] << ',' << hp[static_cast<std::size_t>(b)]
                      << ',' << pstar[static_cast<std::size_t>(b)] << "\n";
            }
        }
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-varying SDE parameter estimation by regime clustering"};
    app.require_subcommand(1);

    GlobalArgs args;
    app.add_option("--config", args.config_path, "JSON run configuration")->required();
    app.add_option("--seed", args.seed_override, "override every seed in the config");
    app.add_option("--threads", args.threads, "worker thread budget (0 = all cores)");
    app.add_option("--out", args.out_override, "override the output directory");

    auto* c_gen = app.add_subcommand("generate", "write a synthetic example dataset");
    auto* c_clu = app.add_subcommand("cluster", "estimate affiliations and parameters");
    auto* c_scan = app.add_subcommand("scan", "scan eps2 and/or K and recommend values");
    auto* c_clo = app.add_subcommand("closure", "fit scaling functions and predict");
    auto* c_sim = app.add_subcommand("simulate", "run the closed system from a saved closure");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        const RunConfig cfg = prepare(args);
        if (c_gen->parsed()) return cmd_generate(cfg);
        if (c_clu->parsed()) return cmd_cluster(cfg);
        if (c_scan->parsed()) return cmd_scan(cfg);
        if (c_clo->parsed()) return cmd_closure(cfg, false);
        if (c_sim->parsed()) return cmd_closure(cfg, true);
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumeric;
    }
}
