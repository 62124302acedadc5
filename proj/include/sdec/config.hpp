#ifndef SDEC_CONFIG_HPP
#define SDEC_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdec/subspace.hpp"
#include "sdec/synth.hpp"

namespace sdec {

// Run configuration for the command-line tool, loaded from JSON. Parsing is
// strict: unknown keys and malformed values are rejected before any compute
// starts (ConfigError).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GenerateConfig {
    std::string example = "ou";
    std::size_t n = 0;        // 0 = example default
    double dt = 0.0;          // 0 = example default
    double dt_internal = 0.0; // 0 = example default
    double T_c = 0.0;         // 0 = example default
    double b0 = 0.0;          // 0 = example default
    std::uint64_t seed = 1;
    std::string stem; // output file stem; defaults to the example name
};

struct ClusterConfig {
    std::size_t k = 2;
    double eps2 = 1.0;
    bool write_fitness = false;
};

struct Eps2Grid {
    double lo = 0.1;
    double hi = 100.0;
    std::size_t points = 101;
    bool log_scale = true;

    std::vector<double> values() const;
};

struct ScanConfig {
    std::string mode = "eps2"; // "eps2" | "k" | "both"
    Eps2Grid eps2_grid;
    std::vector<std::size_t> k_values{2, 3, 4, 5, 6, 7, 8, 9, 10};
    int replicates = 10;     // B
    double gap_eps2 = 0.0;   // 0 = use the energy-scan recommendation
    std::size_t k_for_eps2 = 0; // 0 = cluster.k
};

struct ClosureConfig {
    std::vector<int> degrees;             // default: all 1
    std::vector<int> aux_index_per_param; // default: all 0
    int substeps = 10;
    std::uint64_t seed = 2;
    double x0 = 0.0;
    double min_occupancy = 0.0;
    int histogram_bins = 0; // > 0 writes per-cluster histogram files
};

struct RunConfig {
    std::string model = "ou";
    std::string output_dir = ".";
    std::string data; // input dataset CSV for cluster/scan/closure/simulate
    std::size_t threads = 0;
    GenerateConfig generate;
    ClusterConfig cluster;
    SubspaceConfig subspace; // alpha, tol, max_iters, restarts, seed, solver cfgs
    ScanConfig scan;
    ClosureConfig closure;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text);

} // namespace sdec

#endif
