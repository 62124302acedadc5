#include <doctest.h>

#include <atomic>
#include <cmath>

#include "oracles.hpp"
#include "sdec/theta_solver.hpp"

using namespace sdec;

TEST_CASE("box minimizer: quadratic bowl") {
    ThetaSolverConfig cfg;
    cfg.global_evals = 200;
    cfg.local_evals = 400;
    cfg.population = 150;
    cfg.seed = 5;
    const auto bowl = [](const ParamVector& p) {
        const double dx = p[0] - 1.2, dy = p[1] + 0.4;
        return dx * dx + 3.0 * dy * dy + 0.5 * dx * dy;
    };
    const auto r = minimize_box(bowl, {{-5.0, 5.0}, {-5.0, 5.0}}, cfg);
    CHECK(r.theta[0] == doctest::Approx(1.2).epsilon(1e-3));
    CHECK(r.theta[1] == doctest::Approx(-0.4).epsilon(1e-2));
}

TEST_CASE("box minimizer: correlated narrow valley") {
    // Strong parameter coupling, the regime the direction updates target.
    ThetaSolverConfig cfg;
    cfg.global_evals = 300;
    cfg.local_evals = 600;
    cfg.population = 200;
    cfg.seed = 9;
    const auto valley = [](const ParamVector& p) {
        const double u = p[0] - p[1];
        const double v = p[0] + p[1] - 2.0;
        return 100.0 * u * u + v * v;
    };
    const auto r = minimize_box(valley, {{-4.0, 4.0}, {-4.0, 4.0}}, cfg);
    CHECK(r.objective < 1e-4);
}

TEST_CASE("minimize_theta: recovers stationary parameters within asymptotic error") {
    const SdeModelSpec m = builtin_ou();
    const double a0 = 2.0, b0 = 1.0, s0 = 1.0, dt = 0.1;
    const std::size_t n = 16384;
    const UniformTimeSeries series = oracles::ou_exact_series(a0, b0, s0, dt, n, 31);
    const std::vector<double> ones(n, 1.0);
    ThetaSolverConfig cfg;
    cfg.seed = 7;
    cfg.local_evals = 3000; // enough for the relative-change stop to trigger
    const auto r = minimize_theta(m, series, ones, cfg);

    // Asymptotic standard errors of the exact OU MLE at step dt:
    //   var(b) ~ (e^{2 b dt} - 1) / (N dt^2),  var(s) ~ s^2 / (2N),
    //   var(a) ~ var(mean-dominated combination); a factor-3 window on each.
    const double se_b = std::sqrt((std::exp(2 * b0 * dt) - 1.0) / (n * dt * dt));
    const double se_s = s0 / std::sqrt(2.0 * n);
    const double se_a = se_b * (a0 / b0) * 1.2 + 0.02;
    CHECK(std::abs(r.theta[1] - b0) < 3.0 * se_b);
    CHECK(std::abs(r.theta[2] - s0) < 3.0 * se_s + 0.003); // + expansion bias margin
    CHECK(std::abs(r.theta[0] - a0) < 3.0 * se_a);

    // Definitional consistency of the reported objective.
    CHECK(r.objective ==
          doctest::Approx(weighted_fitness(m, series, r.theta, ones)).epsilon(1e-12));
}

TEST_CASE("minimize_theta: determinism and bound feasibility") {
    const SdeModelSpec m = builtin_ou();
    const UniformTimeSeries series = oracles::ou_exact_series(1.0, 2.0, 0.7, 0.1, 512, 77);
    const std::vector<double> ones(series.size(), 1.0);
    ThetaSolverConfig cfg;
    cfg.global_evals = 120;
    cfg.local_evals = 120;
    cfg.population = 100;
    cfg.seed = 4242;
    const auto r1 = minimize_theta(m, series, ones, cfg);
    const auto r2 = minimize_theta(m, series, ones, cfg);
    CHECK(r1.theta[0] == r2.theta[0]);
    CHECK(r1.theta[1] == r2.theta[1]);
    CHECK(r1.theta[2] == r2.theta[2]);
    CHECK(r1.objective == r2.objective);
    for (int mi = 0; mi < 3; ++mi) {
        CHECK(r1.theta[mi] >= m.param_bounds[mi].first);
        CHECK(r1.theta[mi] <= m.param_bounds[mi].second);
    }
}

TEST_CASE("minimize_theta: every candidate stays in bounds and best-so-far is monotone") {
    const SdeModelSpec m = builtin_ou();
    std::atomic<bool> out_of_bounds{false};
    std::vector<double> best_trace;
    std::mutex mu;
    const auto objective = [&](const ParamVector& p) {
        for (int mi = 0; mi < 3; ++mi)
            if (p[mi] < m.param_bounds[mi].first || p[mi] > m.param_bounds[mi].second)
                out_of_bounds = true;
        const double v = (p[0] - 1) * (p[0] - 1) + (p[1] - 2) * (p[1] - 2) +
                         (p[2] - 3) * (p[2] - 3);
        std::lock_guard<std::mutex> lock(mu);
        best_trace.push_back(v);
        return v;
    };
    ThetaSolverConfig cfg;
    cfg.global_evals = 150;
    cfg.local_evals = 150;
    cfg.population = 100;
    cfg.seed = 1;
    const auto r = minimize_box(objective, m.param_bounds, cfg);
    CHECK(!out_of_bounds.load());
    // The final answer is at least as good as everything ever evaluated.
    double best_seen = best_trace[0];
    for (double v : best_trace) best_seen = std::min(best_seen, v);
    CHECK(r.objective <= best_seen + 1e-15);
}

TEST_CASE("minimize_theta: quantile sanity on all builtins") {
    // Final objective beats the median of 100 uniform random in-bounds draws.
    struct Case {
        SdeModelSpec model;
        ParamVector truth;
        double x0;
        double dt;
    };
    const Case cases[] = {
        {builtin_ou(), {2.0, 1.0, 1.0}, 2.0, 0.1},
        {builtin_logdrift(), {1.0, 0.4}, 1.0, 0.05},
        {builtin_doublewell(), {1.5, 0.8}, 1.0, 0.05},
    };
    for (const auto& cs : cases) {
        UniformTimeSeries series;
        if (cs.model.id == "ou") {
            series = oracles::ou_exact_series(2.0, 1.0, 1.0, cs.dt, 2048, 5);
        } else {
            // Crude Euler path kept inside the domain; adequate as data.
            series.t0 = 0.0;
            series.dt = cs.dt;
            series.values.resize(2048);
            double x = cs.x0;
            CounterRng rng(55, 1);
            const int sub = 20;
            for (std::size_t i = 0; i < series.size(); ++i) {
                series.values[i] = x;
                for (int s = 0; s < sub; ++s) {
                    const double h = cs.dt / sub;
                    const double dw = std::sqrt(h) * rng.normal();
                    x += cs.model.drift(x, cs.truth) * h + cs.model.diffusion(x, cs.truth) * dw;
                    if (cs.model.state_lo_open && x < 1e-6) x = 1e-6;
                }
            }
        }
        const std::vector<double> ones(series.size(), 1.0);
        ThetaSolverConfig cfg;
        cfg.seed = 11;
        const auto r = minimize_theta(cs.model, series, ones, cfg);

        CounterRng rng(123, 2);
        std::vector<double> draws;
        for (int i = 0; i < 100; ++i) {
            ParamVector th;
            for (const auto& [lo, hi] : cs.model.param_bounds)
                th.values.push_back(rng.uniform(lo + 1e-6, hi - 1e-6));
            draws.push_back(weighted_fitness(cs.model, series, th, ones));
        }
        std::sort(draws.begin(), draws.end());
        CHECK(r.objective <= draws[49]);
    }
}

TEST_CASE("minimize_theta: empty weight row is rejected") {
    const SdeModelSpec m = builtin_ou();
    const UniformTimeSeries series = oracles::ou_exact_series(1.0, 1.0, 1.0, 0.1, 64, 3);
    const std::vector<double> zeros(series.size(), 0.0);
    CHECK_THROWS_WITH_AS(minimize_theta(m, series, zeros, ThetaSolverConfig{}),
                         doctest::Contains("empty cluster"), std::invalid_argument);
}

TEST_CASE("solver config validation") {
    ThetaSolverConfig cfg;
    cfg.global_evals = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.global_evals = 10;
    cfg.rel_tol = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
