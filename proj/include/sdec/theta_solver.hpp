#ifndef SDEC_THETA_SOLVER_HPP
#define SDEC_THETA_SOLVER_HPP

#include <cstdint>
#include <functional>
#include <span>

#include "sdec/likelihood.hpp"
#include "sdec/model.hpp"

namespace sdec {

struct ThetaSolverConfig {
    int global_evals = 300;
    int local_evals = 300;
    int population = 3000;
    double rel_tol = 1e-10;
    std::uint64_t seed = 0;
    // Threads used for evaluating the random sample batch; keep at 1 when
    // several solves already run in parallel.
    std::size_t n_threads = 1;

    void validate() const;
};

struct ThetaSolveResult {
    ParamVector theta;
    double objective = 0.0;
    int evaluations = 0;
};

// Minimizes sum_i gamma(t_i) f(t_i; theta) over the parameter box by uniform
// random search with controlled-random-search reflections, followed by a
// direction-set (principal-axis style) line-search polish. Derivative free,
// deterministic per seed, every iterate stays inside the bounds. An optional
// warm-start point joins the sample population.
//
// Throws std::invalid_argument when gamma_row is (numerically) all zero; the
// caller decides how to treat empty clusters.
ThetaSolveResult minimize_theta(const SdeModelSpec& model, const UniformTimeSeries& series,
                                std::span<const double> gamma_row, const ThetaSolverConfig& cfg,
                                const ParamVector* warm_start = nullptr);

// Same optimizer on an arbitrary objective over a box; exposed for tests.
ThetaSolveResult minimize_box(const std::function<double(const ParamVector&)>& objective,
                              const std::vector<std::pair<double, double>>& bounds,
                              const ThetaSolverConfig& cfg,
                              const ParamVector* warm_start = nullptr);

} // namespace sdec

#endif
