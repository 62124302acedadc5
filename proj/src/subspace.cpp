#include "sdec/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sdec/parallel.hpp"
#include "sdec/rng.hpp"

namespace sdec {

AffiliationMatrix random_initial_gamma(std::size_t k, std::size_t n, std::uint64_t seed) {
    if (k < 1 || n < 2) throw std::invalid_argument("initial gamma: bad shape");
    CounterRng rng(seed, 0x11a0);

    // Hard assignment from a uniform K-state chain with mean dwell N/(10K).
    const double dwell = std::max(1.0, static_cast<double>(n) / (10.0 * static_cast<double>(k)));
    const double p_stay = 1.0 - 1.0 / dwell;
    std::vector<std::size_t> state(n);
    state[0] = rng.index(k);
    for (std::size_t i = 1; i < n; ++i) {
        if (rng.uniform() < p_stay || k == 1) {
            state[i] = state[i - 1];
        } else {
            std::size_t s = rng.index(k - 1);
            if (s >= state[i - 1]) ++s;
            state[i] = s;
        }
    }

    AffiliationMatrix gamma;
    gamma.grid_len = n;
    gamma.weights.assign(k, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) gamma.weights[state[i]][i] = 1.0;

    // One width-5 moving average per row; averaging columns of a simplex
    // stays on the simplex.
    AffiliationMatrix smooth = gamma;
    const std::ptrdiff_t half = 2;
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            int cnt = 0;
            for (std::ptrdiff_t o = -half; o <= half; ++o) {
                const std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i) + o;
                if (j < 0 || j >= static_cast<std::ptrdiff_t>(n)) continue;
                acc += gamma.weights[c][static_cast<std::size_t>(j)];
                ++cnt;
            }
            smooth.weights[c][i] = acc / static_cast<double>(cnt);
        }
    }
    return smooth;
}

namespace {

struct SweepState {
    AffiliationMatrix gamma_fine;
    AffiliationMatrix gamma_coarse;
    std::vector<ParamVector> theta;
    bool theta_valid = false;
};

ClusteringResult run_single(const SdeModelSpec& model, const UniformTimeSeries& series,
                            std::size_t k, double eps2, const SubspaceConfig& cfg,
                            SweepState state, std::uint64_t run_seed) {
    const std::size_t n = series.size();
    const FemGrid grid = FemGrid::make(n, series.dt, cfg.alpha);

    ClusteringResult res;
    res.eps2 = eps2;
    res.n_clusters = k;
    res.seed = run_seed;

    if (!state.theta_valid) state.theta.assign(k, ParamVector{});
    ReducedFitness reduced;
    reduced.b.assign(k, {});
    std::vector<std::uint64_t> floor_hits(k, 0);

    double prev_l = std::numeric_limits<double>::quiet_NaN();
    std::size_t sweep = 0;
    for (; sweep < cfg.max_iters; ++sweep) {
        // Parameter step: per-cluster weighted fit on the fine grid. Clusters
        // whose weight row has (numerically) vanished keep their previous
        // estimate.
        std::vector<ParamVector> new_theta = state.theta;
        const bool have_prev = state.theta_valid;
        parallel_for(k, [&](std::size_t c) {
            ThetaSolverConfig tcfg = cfg.theta;
            tcfg.seed = mix_seed(run_seed, 0xA100 + sweep);
            double mass = 0.0;
            for (double w : state.gamma_fine.weights[c]) mass += w;
            if (mass <= 1e-12) {
                if (!have_prev)
                    throw std::runtime_error("subspace: cluster " + std::to_string(c) +
                                             " empty at the first sweep");
                return; // keep previous estimate
            }
            const ParamVector* warm = have_prev ? &state.theta[c] : nullptr;
            new_theta[c] =
                minimize_theta(model, series, state.gamma_fine.weights[c], tcfg, warm).theta;
        });
        state.theta = std::move(new_theta);
        state.theta_valid = true;

        // Fitness rows and their reduction to the coarse grid.
        parallel_for(k, [&](std::size_t c) {
            DensityStats st;
            const std::vector<double> row = fitness_row(model, series, state.theta[c], &st);
            floor_hits[c] = st.floored;
            reduced.b[c] = reduce_fitness(row, grid);
        });

        // Affiliation step on the coarse grid, then interpolation back.
        const QpResult qp = solve_qp(reduced, eps2, state.gamma_coarse, cfg.qp);
        state.gamma_coarse = qp.gamma;
        state.gamma_fine = interpolate_gamma(state.gamma_coarse, grid);

        res.functional_trace.push_back(qp.objective);
        if (sweep > 0) {
            const double diff = std::abs(qp.objective - prev_l);
            if (diff <= cfg.tol * std::max(1.0, std::abs(prev_l))) {
                res.converged = true;
                ++sweep;
                break;
            }
        }
        prev_l = qp.objective;
    }

    res.iterations = sweep;
    res.gamma_fine = std::move(state.gamma_fine);
    res.theta = std::move(state.theta);
    for (std::uint64_t h : floor_hits) res.density_floor_hits += h;
    return res;
}

} // namespace

ClusteringResult run_subspace(const SdeModelSpec& model, const UniformTimeSeries& series,
                              std::size_t k, double eps2, const SubspaceConfig& cfg,
                              const std::optional<SubspaceInit>& init) {
    if (k < 1) throw std::invalid_argument("subspace: need at least one cluster");
    if (eps2 < 0.0) throw std::invalid_argument("subspace: eps2 must be nonnegative");
    series.validate(model);
    if (series.size() < 10 * k)
        throw std::invalid_argument("subspace: series too short for " + std::to_string(k) +
                                    " clusters");
    const FemGrid grid = FemGrid::make(series.size(), series.dt, cfg.alpha);

    if (init.has_value()) {
        // Warm start: a single continuation run, no restarts.
        SweepState st;
        st.gamma_fine = init->gamma_fine;
        st.gamma_fine.require_feasible("run_subspace init");
        if (st.gamma_fine.clusters() != k || st.gamma_fine.grid_len != series.size())
            throw std::invalid_argument("subspace: init gamma shape mismatch");
        st.gamma_coarse = reduce_gamma_grid(st.gamma_fine, grid);
        if (!init->theta.empty()) {
            if (init->theta.size() != k)
                throw std::invalid_argument("subspace: init theta count mismatch");
            st.theta = init->theta;
            st.theta_valid = true;
        }
        return run_single(model, series, k, eps2, cfg, std::move(st), cfg.seed);
    }

    const int restarts = std::max(1, cfg.n_restarts);
    ClusteringResult best;
    bool have = false;
    for (int r = 0; r < restarts; ++r) {
        const std::uint64_t run_seed = mix_seed(cfg.seed, 0x5eed + static_cast<std::uint64_t>(r));
        SweepState st;
        st.gamma_fine = random_initial_gamma(k, series.size(), run_seed);
        st.gamma_coarse = reduce_gamma_grid(st.gamma_fine, grid);
        ClusteringResult res = run_single(model, series, k, eps2, cfg, std::move(st), run_seed);
        if (!have || res.final_functional() < best.final_functional()) {
            best = std::move(res);
            have = true;
        }
    }
    return best;
}

std::vector<ClusteringResult> scan_eps2(const SdeModelSpec& model,
                                        const UniformTimeSeries& series, std::size_t k,
                                        const std::vector<double>& eps2_list,
                                        const SubspaceConfig& cfg) {
    if (eps2_list.empty()) throw std::invalid_argument("scan_eps2: empty grid");
    if (!std::is_sorted(eps2_list.begin(), eps2_list.end()))
        throw std::invalid_argument("scan_eps2: grid must be sorted ascending");

    std::vector<ClusteringResult> results;
    results.reserve(eps2_list.size());
    std::optional<SubspaceInit> carry;
    for (double eps2 : eps2_list) {
        ClusteringResult r = run_subspace(model, series, k, eps2, cfg, carry);
        carry = SubspaceInit{r.gamma_fine, r.theta};
        results.push_back(std::move(r));
    }
    if (cfg.round_trip && eps2_list.size() > 1) {
        for (std::size_t idx = eps2_list.size(); idx-- > 0;) {
            ClusteringResult r =
                run_subspace(model, series, k, eps2_list[idx], cfg, carry);
            carry = SubspaceInit{r.gamma_fine, r.theta};
            if (r.final_functional() < results[idx].final_functional()) results[idx] = std::move(r);
        }
    }
    return results;
}

} // namespace sdec
