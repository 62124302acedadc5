#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "sdec/gamma_solver.hpp"
#include "sdec/rng.hpp"

using namespace sdec;

namespace {

AffiliationMatrix make_gamma(std::vector<std::vector<double>> rows) {
    AffiliationMatrix g;
    g.grid_len = rows.empty() ? 0 : rows[0].size();
    g.weights = std::move(rows);
    return g;
}

AffiliationMatrix random_feasible(std::size_t k, std::size_t n, std::uint64_t seed) {
    CounterRng rng(seed, 0);
    AffiliationMatrix g;
    g.grid_len = n;
    g.weights.assign(k, std::vector<double>(n));
    for (std::size_t j = 0; j < n; ++j) {
        double sum = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            g.weights[c][j] = -std::log(rng.uniform());
            sum += g.weights[c][j];
        }
        for (std::size_t c = 0; c < k; ++c) g.weights[c][j] /= sum;
    }
    return g;
}

// Dense objective evaluation independent of the solver path.
double dense_objective(const ReducedFitness& b, double eps2, const AffiliationMatrix& g) {
    const std::size_t k = g.clusters(), n = g.grid_len;
    const auto H = stiffness_dense(n);
    double acc = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t j = 0; j < n; ++j) acc += b.b[c][j] * g.weights[c][j];
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t s = 0; s < n; ++s)
                acc += eps2 * g.weights[c][r] * H[r][s] * g.weights[c][s];
    }
    return acc / static_cast<double>(n);
}

} // namespace

TEST_CASE("fem grid construction") {
    const FemGrid g = FemGrid::make(101, 0.1, 0.25);
    CHECK(g.n_coarse == 25);
    CHECK(g.dtau == doctest::Approx(100.0 * 0.1 / 24.0));
    const FemGrid full = FemGrid::make(64, 0.5, 1.0);
    CHECK(full.n_coarse == 64);
    CHECK(full.dtau == doctest::Approx(0.5));
    CHECK_THROWS_AS(FemGrid::make(1, 0.1, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(FemGrid::make(10, 0.1, 1.5), std::invalid_argument);
}

TEST_CASE("reduce_fitness: constant rows against hat masses") {
    // Nested grids (stride 3) make the trapezoid quadrature exact.
    const FemGrid g = FemGrid::make(13, 0.5, 5.0 / 13.0);
    REQUIRE(g.n_coarse == 5);
    const std::vector<double> f(13, 2.0);
    const auto b = reduce_fitness(f, g);
    for (std::size_t j = 1; j + 1 < b.size(); ++j)
        CHECK(b[j] == doctest::Approx(2.0 * g.dtau).epsilon(1e-12));
    CHECK(b.front() == doctest::Approx(2.0 * g.dtau / 2.0).epsilon(1e-12));
    CHECK(b.back() == doctest::Approx(2.0 * g.dtau / 2.0).epsilon(1e-12));
}

TEST_CASE("reduce_fitness: alpha=1 with mass normalization reproduces any row") {
    const FemGrid g = FemGrid::make(17, 0.2, 1.0);
    std::vector<double> f(17);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = 0.3 + 0.7 * i; // linear
    const auto b = reduce_fitness(f, g);
    for (std::size_t j = 0; j < b.size(); ++j) {
        const double mass = (j == 0 || j + 1 == b.size()) ? g.dtau / 2.0 : g.dtau;
        CHECK(b[j] / mass == doctest::Approx(f[j]).epsilon(1e-12));
    }
}

TEST_CASE("stiffness assembly matches the printed tridiagonal form") {
    const auto h = stiffness_dense(3);
    CHECK(h[0][0] == 2.0);
    CHECK(h[0][1] == -1.0);
    CHECK(h[0][2] == 0.0);
    CHECK(h[1][0] == -1.0);
    CHECK(h[1][1] == 2.0);
    CHECK(h[1][2] == -1.0);
    CHECK(h[2][1] == -1.0);
    CHECK(h[2][2] == 2.0);

    // Quadratic form for a constant vector on N=2: entries sum to 2.
    std::vector<double> x(2, 0.7), y(2);
    apply_stiffness(x, y);
    CHECK(x[0] * y[0] + x[1] * y[1] == doctest::Approx(0.7 * 0.7 * 2.0));

    // Positive semidefinite: 1000 random vectors.
    CounterRng rng(8, 0);
    std::vector<double> v(9), hv(9);
    for (int rep = 0; rep < 1000; ++rep) {
        for (auto& e : v) e = rng.uniform(-1.0, 1.0);
        apply_stiffness(v, hv);
        double q = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) q += v[i] * hv[i];
        CHECK(q >= -1e-12);
    }
}

TEST_CASE("apply_stiffness agrees with the dense matrix") {
    CounterRng rng(9, 0);
    const auto H = stiffness_dense(11);
    std::vector<double> v(11), hv(11);
    for (auto& e : v) e = rng.uniform(-2.0, 2.0);
    apply_stiffness(v, hv);
    for (std::size_t r = 0; r < 11; ++r) {
        double want = 0.0;
        for (std::size_t c = 0; c < 11; ++c) want += H[r][c] * v[c];
        CHECK(hv[r] == doctest::Approx(want).epsilon(1e-14));
    }
}

TEST_CASE("simplex projection: known columns") {
    {
        std::vector<double> col{0.8, 0.8};
        project_simplex(col);
        CHECK(col[0] == doctest::Approx(0.5));
        CHECK(col[1] == doctest::Approx(0.5));
    }
    {
        std::vector<double> col{2.0, -1.0};
        project_simplex(col);
        CHECK(col[0] == doctest::Approx(1.0));
        CHECK(col[1] == doctest::Approx(0.0));
    }
    {
        std::vector<double> col{0.2, 0.5, 0.3};
        project_simplex(col);
        CHECK(col[0] == doctest::Approx(0.2));
        CHECK(col[1] == doctest::Approx(0.5));
        CHECK(col[2] == doctest::Approx(0.3));
    }
}

TEST_CASE("simplex projection matches the exhaustive KKT oracle") {
    CounterRng rng(31, 0);
    for (std::size_t k : {2u, 3u, 5u, 8u}) {
        for (int rep = 0; rep < 200; ++rep) {
            std::vector<double> v(k);
            for (auto& e : v) e = rng.uniform(-2.0, 3.0);
            const auto want = oracles::simplex_projection_bruteforce(v);
            std::vector<double> got = v;
            project_simplex(got);
            for (std::size_t i = 0; i < k; ++i)
                CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-10));
        }
    }
}

TEST_CASE("project_simplex_columns feasibility and idempotence") {
    CounterRng rng(12, 0);
    AffiliationMatrix g;
    g.grid_len = 40;
    g.weights.assign(4, std::vector<double>(40));
    for (auto& row : g.weights)
        for (auto& e : row) e = rng.uniform(-1.0, 2.0);
    const AffiliationMatrix p = project_simplex_columns(g);
    CHECK(p.feasible());
    const AffiliationMatrix pp = project_simplex_columns(p);
    for (std::size_t c = 0; c < 4; ++c)
        for (std::size_t j = 0; j < 40; ++j)
            CHECK(pp.weights[c][j] == doctest::Approx(p.weights[c][j]).epsilon(1e-13));
}

TEST_CASE("qp: zero regularization picks per-node minima") {
    ReducedFitness b;
    b.b = {{1.0, 2.0}, {3.0, 1.0}}; // node 1 favors cluster 1, node 2 cluster 2
    const AffiliationMatrix g0 = make_gamma({{0.5, 0.5}, {0.5, 0.5}});
    const QpResult r = solve_qp(b, 0.0, g0);
    CHECK(r.converged);
    CHECK(r.gamma.weights[0][0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.gamma.weights[1][0] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(r.gamma.weights[0][1] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(r.gamma.weights[1][1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("qp: zero regularization equals the vertex brute force on small problems") {
    CounterRng rng(64, 0);
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t k = 2 + rng.index(3);  // 2..4
        const std::size_t n = 2 + rng.index(5);  // 2..6
        ReducedFitness b;
        b.b.assign(k, std::vector<double>(n));
        for (auto& row : b.b)
            for (auto& e : row) e = rng.uniform(-1.0, 1.0);
        const QpResult r = solve_qp(b, 0.0, random_feasible(k, n, 100 + rep));
        // Brute force over all k^n hard assignments.
        double best = std::numeric_limits<double>::infinity();
        std::vector<std::size_t> assign(n, 0);
        while (true) {
            double obj = 0.0;
            for (std::size_t j = 0; j < n; ++j) obj += b.b[assign[j]][j];
            best = std::min(best, obj / static_cast<double>(n));
            std::size_t pos = 0;
            while (pos < n && ++assign[pos] == k) assign[pos++] = 0;
            if (pos == n) break;
        }
        CHECK(r.objective == doctest::Approx(best).epsilon(1e-8));
    }
}

TEST_CASE("qp: huge regularization flattens the affiliations") {
    ReducedFitness b;
    b.b.assign(2, std::vector<double>(12));
    CounterRng rng(3, 0);
    for (std::size_t j = 0; j < 12; ++j) {
        b.b[0][j] = rng.uniform(0.0, 1.0);
        b.b[1][j] = b.b[0][11 - j]; // symmetric rows
    }
    const QpResult r = solve_qp(b, 1e9, random_feasible(2, 12, 5));
    for (std::size_t c = 0; c < 2; ++c) {
        double mean = 0.0;
        for (double v : r.gamma.weights[c]) mean += v;
        mean /= 12.0;
        double var = 0.0;
        for (double v : r.gamma.weights[c]) var += (v - mean) * (v - mean);
        var /= 12.0;
        CHECK(var < 1e-6);
    }
}

TEST_CASE("qp: objective matches a dense evaluation and never exceeds the start") {
    CounterRng rng(21, 0);
    for (double eps2 : {0.0, 0.3, 5.0}) {
        ReducedFitness b;
        const std::size_t k = 3, n = 24;
        b.b.assign(k, std::vector<double>(n));
        for (auto& row : b.b)
            for (auto& e : row) e = rng.uniform(-2.0, 2.0);
        const AffiliationMatrix g0 = random_feasible(k, n, 17);
        const QpResult r = solve_qp(b, eps2, g0);
        CHECK(r.gamma.feasible());
        CHECK(r.objective == doctest::Approx(dense_objective(b, eps2, r.gamma)).epsilon(1e-9));
        CHECK(r.objective <= qp_objective(b, eps2, g0) + 1e-12);
        // Not worse than any hard assignment (spot check a few).
        for (int rep = 0; rep < 16; ++rep) {
            AffiliationMatrix hard;
            hard.grid_len = n;
            hard.weights.assign(k, std::vector<double>(n, 0.0));
            for (std::size_t j = 0; j < n; ++j) hard.weights[rng.index(k)][j] = 1.0;
            CHECK(r.objective <= qp_objective(b, eps2, hard) + 1e-9);
        }
    }
}

TEST_CASE("qp rejects an infeasible start") {
    ReducedFitness b;
    b.b = {{1.0, 1.0}, {1.0, 1.0}};
    const AffiliationMatrix bad = make_gamma({{0.9, 0.9}, {0.9, 0.9}});
    CHECK_THROWS_AS(solve_qp(b, 1.0, bad), std::invalid_argument);
}

TEST_CASE("interpolation: constants, midpoints, identity") {
    const FemGrid g = FemGrid::make(5, 1.0, 0.6); // n_coarse = 3
    REQUIRE(g.n_coarse == 3);
    const AffiliationMatrix coarse = make_gamma({{1.0, 0.0, 0.5}, {0.0, 1.0, 0.5}});
    const AffiliationMatrix fine = interpolate_gamma(coarse, g);
    CHECK(fine.grid_len == 5);
    CHECK(fine.feasible());
    CHECK(fine.weights[0][0] == doctest::Approx(1.0));
    CHECK(fine.weights[0][1] == doctest::Approx(0.5)); // midpoint of (1, 0)
    CHECK(fine.weights[1][1] == doctest::Approx(0.5));
    CHECK(fine.weights[0][2] == doctest::Approx(0.0));

    // alpha = 1: reduce-grid then interpolate is the identity.
    const FemGrid full = FemGrid::make(7, 0.25, 1.0);
    const AffiliationMatrix any = random_feasible(3, 7, 77);
    const AffiliationMatrix back = interpolate_gamma(reduce_gamma_grid(any, full), full);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t j = 0; j < 7; ++j)
            CHECK(back.weights[c][j] == doctest::Approx(any.weights[c][j]).epsilon(1e-14));
}

TEST_CASE("interpolation preserves the partition of unity on random coarse data") {
    const FemGrid g = FemGrid::make(101, 0.1, 0.3);
    const AffiliationMatrix coarse = random_feasible(4, g.n_coarse, 31);
    const AffiliationMatrix fine = interpolate_gamma(coarse, g);
    CHECK(fine.feasible(1e-10));
}

TEST_CASE("reduce then interpolate reproduces linear rows (exactness on linears)") {
    const FemGrid g = FemGrid::make(31, 0.5, 11.0 / 31.0);
    REQUIRE((g.n_fine - 1) % (g.n_coarse - 1) == 0); // nested grids
    AffiliationMatrix fine;
    fine.grid_len = 31;
    fine.weights.assign(2, std::vector<double>(31));
    for (std::size_t i = 0; i < 31; ++i) {
        const double t = i / 30.0;
        fine.weights[0][i] = 0.2 + 0.6 * t;
        fine.weights[1][i] = 0.8 - 0.6 * t;
    }
    const AffiliationMatrix back = interpolate_gamma(reduce_gamma_grid(fine, g), g);
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < 31; ++i)
            CHECK(back.weights[c][i] == doctest::Approx(fine.weights[c][i]).epsilon(1e-13));
}
