#ifndef SDEC_CLOSURE_HPP
#define SDEC_CLOSURE_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "sdec/subspace.hpp"

namespace sdec {

// Per-parameter polynomial link from an auxiliary process to an SDE
// parameter, fitted through cluster-averaged points. Evaluation clamps the
// input to the range seen during fitting.
struct ScalingFunction {
    std::vector<double> coeffs; // lowest order first
    double u_min = 0.0;
    double u_max = 0.0;
    int aux_index = 0;

    double operator()(double u) const;
};

struct ClosureFit {
    std::vector<std::vector<double>> u_bars; // [aux process][cluster]
    std::vector<ParamVector> theta_bars;     // per cluster
    std::vector<ScalingFunction> scaling;    // per parameter
    std::vector<double> residual_rms;        // per parameter
};

// Weighted average of u under one affiliation row. Throws
// std::invalid_argument when the weight mass vanishes.
double cluster_weighted_mean(std::span<const double> u, std::span<const double> gamma_k);

// Least-squares polynomial fit of theta_component against u_bars,
// coefficients lowest order first. Throws std::invalid_argument when there
// are too few points or the design is rank deficient (message suggests a
// lower degree).
std::vector<double> fit_scaling(std::span<const double> u_bars,
                                std::span<const double> theta_component, int degree);

// Full closure: cluster means of each auxiliary series, then one polynomial
// per parameter. aux_index_per_param[m] names the series driving theta_m;
// degrees[m] its polynomial degree. Clusters with occupancy below
// min_occupancy * T are left out of the regressions.
ClosureFit fit_closure(const ClusteringResult& result,
                       const std::vector<UniformTimeSeries>& aux,
                       const std::vector<int>& aux_index_per_param,
                       const std::vector<int>& degrees, double min_occupancy = 0.0);

// theta_m(t_i) = sum_k theta_bar[k][m] gamma_k(t_i); rows are parameters.
std::vector<std::vector<double>> reconstruct_theta_path(const ClusteringResult& result);

struct ClosedSimConfig {
    double x0 = 0.0;
    int substeps = 10;
    std::uint64_t seed = 0;
};

struct ClosedSimStats {
    std::uint64_t theta_clamped = 0; // parameter pushed back into bounds
    std::uint64_t state_reflected = 0;
};

// Integrates dX = f(X; S(u(t))) dt + g(X; S(u(t))) dW over the time grid of
// the auxiliary series, Milstein when the diffusion is state dependent,
// Euler-Maruyama otherwise. theta(t) comes from the fitted scalings with
// range clamping; deterministic per seed.
UniformTimeSeries simulate_closed(const SdeModelSpec& model, const ClosureFit& closure,
                                  const std::vector<UniformTimeSeries>& aux,
                                  const ClosedSimConfig& cfg, ClosedSimStats* stats = nullptr);

} // namespace sdec

#endif
