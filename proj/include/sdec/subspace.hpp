#ifndef SDEC_SUBSPACE_HPP
#define SDEC_SUBSPACE_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "sdec/gamma_solver.hpp"
#include "sdec/likelihood.hpp"
#include "sdec/theta_solver.hpp"

namespace sdec {

struct SubspaceConfig {
    double alpha = 1.0 / 3.0;
    std::size_t max_iters = 100;
    double tol = 1e-8;     // relative change of the reduced functional
    int n_restarts = 3;    // fresh random starts; the best final value wins
    std::uint64_t seed = 1;
    ThetaSolverConfig theta;
    QpConfig qp;
    // Traverse an eps2 scan low -> high -> low, keeping the better result
    // per value.
    bool round_trip = false;
};

struct ClusteringResult {
    AffiliationMatrix gamma_fine;
    std::vector<ParamVector> theta;
    std::vector<double> functional_trace; // reduced functional after each sweep
    std::size_t iterations = 0;
    bool converged = false;
    double eps2 = 0.0;
    std::size_t n_clusters = 0;
    std::uint64_t seed = 0;
    std::uint64_t density_floor_hits = 0;

    double final_functional() const {
        return functional_trace.empty() ? 0.0 : functional_trace.back();
    }
};

// Optional warm start for the alternating loop.
struct SubspaceInit {
    AffiliationMatrix gamma_fine;
    std::vector<ParamVector> theta; // may be empty: first sweep estimates it
};

// Random feasible initial affiliations: a temporally coherent hard state
// sequence smoothed by a short simplex-preserving moving average.
AffiliationMatrix random_initial_gamma(std::size_t k, std::size_t n, std::uint64_t seed);

// Alternating minimization: per-cluster parameter fits on the fine grid,
// fitness reduction, regularized affiliation QP on the coarse grid, linear
// interpolation back. Stops when the reduced functional settles or after
// max_iters sweeps.
ClusteringResult run_subspace(const SdeModelSpec& model, const UniformTimeSeries& series,
                              std::size_t k, double eps2, const SubspaceConfig& cfg,
                              const std::optional<SubspaceInit>& init = std::nullopt);

// Sequential scan over sorted eps2 values, warm starting each run from the
// previous solution (round trip optional, keeping the better functional).
std::vector<ClusteringResult> scan_eps2(const SdeModelSpec& model,
                                        const UniformTimeSeries& series, std::size_t k,
                                        const std::vector<double>& eps2_list,
                                        const SubspaceConfig& cfg);

} // namespace sdec

#endif
