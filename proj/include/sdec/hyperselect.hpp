#ifndef SDEC_HYPERSELECT_HPP
#define SDEC_HYPERSELECT_HPP

#include <cstdint>
#include <vector>

#include "sdec/subspace.hpp"

namespace sdec {

// --- Orthonormal Haar multiresolution -------------------------------------

// Detail bands of the full-depth orthonormal Haar transform of x after
// reflect-padding to the next power of two. bands[c] holds the level-(c+1)
// coefficients, finest first; the single approximation coefficient is
// returned separately.
struct HaarBands {
    std::vector<std::vector<double>> details;
    double approximation = 0.0;
};
HaarBands haar_detail_bands(std::vector<double> x);

// --- Regularization-strength selection ------------------------------------

// Cluster-averaged detail energy of the affiliations: per cluster, the sum
// of squared Haar detail coefficients times dt, with the approximation band
// and the `remove_levels` finest detail bands discarded, averaged over K.
double gamma_energy(const AffiliationMatrix& gamma, double dt, int remove_levels);

struct EnergyCurve {
    std::vector<double> eps2_values;
    std::vector<std::vector<double>> energy; // [filter level][eps2 index]
    std::vector<double> argmax_per_level;
    double recommended_eps2 = 0.0; // level-0 argmax
};

// Energy curve across an eps2 scan (all results must share K and data).
// Filter levels 0..min(C-1, 9).
EnergyCurve select_eps2(const std::vector<ClusteringResult>& results, double dt);

// --- Cluster-count selection -----------------------------------------------

// Invariant density of dX = f dt + g dW on the given ascending grid:
// p ~ exp(S(x)) / g^2 with S the cumulative trapezoid of 2 f / g^2,
// normalized to unit trapezoid mass. Throws std::runtime_error (naming
// `label`) when the density cannot be normalized.
std::vector<double> stationary_density(const SdeModelSpec& model, const ParamVector& theta,
                                       const std::vector<double>& grid, int label = -1);

// Shared evaluation grid spanning every cluster's effective support.
std::vector<double> density_union_grid(const SdeModelSpec& model,
                                       const std::vector<ParamVector>& thetas,
                                       std::size_t points = 4096);

// Occupancy weights nu_j = sum_i gamma_j(t_i) dt.
std::vector<double> occupancy_weights(const AffiliationMatrix& gamma, double dt);

// Weighted diversity W_K = sum_{i != j} nu_j KL(p_i || p_j) of the cluster
// stationary densities.
double diversity(const std::vector<ParamVector>& thetas, const AffiliationMatrix& gamma,
                 const SdeModelSpec& model, double dt);

// Wiener path with reflecting boundaries, folded back into [lo, hi];
// starts at the midpoint.
UniformTimeSeries reflected_wiener(std::size_t n, double dt, double lo, double hi, double scale,
                                   std::uint64_t seed);

struct GapStatisticConfig {
    double eps2 = 1.0;
    int replicates = 10; // B
    SubspaceConfig subspace;
};

struct DiversityReport {
    std::vector<std::size_t> k_values;
    std::vector<double> logW;          // data
    std::vector<double> logW_ref_mean; // E[log W*] over replicates
    std::vector<double> gap;           // ref mean - data
    int replicates = 0;
    std::size_t recommended_k = 0; // argmin gap, ties toward smaller K
    std::vector<std::string> failures;
};

// Clusters the data and B reflected-Wiener references at every K with
// identical settings and reports the diversity gap. Reference jobs run in
// parallel; failed sub-runs are recorded and excluded (error if fewer than
// half the replicates survive for some K).
DiversityReport gap_statistic(const SdeModelSpec& model, const UniformTimeSeries& series,
                              const std::vector<std::size_t>& k_values,
                              const GapStatisticConfig& cfg);

} // namespace sdec

#endif
