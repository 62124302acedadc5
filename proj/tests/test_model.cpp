#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "sdec/model.hpp"
#include "sdec/rng.hpp"

using namespace sdec;

namespace {

ParamVector random_theta(const SdeModelSpec& m, CounterRng& rng) {
    ParamVector th;
    for (const auto& [lo, hi] : m.param_bounds) {
        const double margin = 0.05 * (hi - lo);
        th.values.push_back(rng.uniform(lo + margin, hi - margin));
    }
    return th;
}

double state_probe(const SdeModelSpec& m, double s01) {
    // Map [0,1] into a representative slice of the state domain.
    if (m.state_lo_open) return 0.05 + 4.0 * s01; // positive-only models
    return -4.0 + 8.0 * s01;
}

void check_model_identities(const SdeModelSpec& m, const ParamVector& th) {
    for (int i = 0; i <= 20; ++i) {
        const double x = state_probe(m, i / 20.0);
        // Transform round trip.
        const double y = m.lamperti(x, th);
        CHECK(m.lamperti_inverse(y, th) == doctest::Approx(x).epsilon(1e-10));
        // F'(x) g(x) = 1.
        const double h = 1e-6 * std::max(1.0, std::abs(x));
        const double fp = (m.lamperti(x + h, th) - m.lamperti(x - h, th)) / (2.0 * h);
        CHECK(fp * m.diffusion(x, th) == doctest::Approx(1.0).epsilon(1e-8));
        // mu(y) = f/g - g_x/2 from drift/diffusion directly.
        const double gx = (m.diffusion(x + h, th) - m.diffusion(x - h, th)) / (2.0 * h);
        const double mu_direct = m.drift(x, th) / m.diffusion(x, th) - 0.5 * gx;
        const DriftDerivs d = m.transformed_drift_derivs(y, th);
        CHECK(d[0] == doctest::Approx(mu_direct).epsilon(1e-6));
    }
}

void check_mu_derivatives_vs_fd(const SdeModelSpec& m, const ParamVector& th) {
    const auto mu = [&](double y) { return m.transformed_drift_derivs(y, th)[0]; };
    for (int i = 2; i <= 18; ++i) {
        const double x = state_probe(m, i / 20.0);
        const double y = m.lamperti(x, th);
        const DriftDerivs d = m.transformed_drift_derivs(y, th);
        const double h = 1e-4;
        CHECK(d[1] == doctest::Approx(oracles::fd1(mu, y, h)).epsilon(1e-5));
        const double scale2 = std::max(1.0, std::abs(d[2]));
        CHECK(d[2] / scale2 ==
              doctest::Approx(oracles::fd2(mu, y, h) / scale2).epsilon(1e-4));
    }
}

} // namespace

TEST_CASE("ou builtin basics") {
    const SdeModelSpec m = builtin_ou();
    CHECK(m.n_params == 3);
    CHECK(m.drift(0.0, {2.0, 1.0, 1.0}) == doctest::Approx(2.0));
    CHECK(m.lamperti(3.0, {0.0, 1.0, 2.0}) == doctest::Approx(1.5));
    const DriftDerivs d = m.transformed_drift_derivs(0.0, {2.0, 1.0, 1.0});
    CHECK(d[0] == doctest::Approx(2.0));
    CHECK(d[1] == doctest::Approx(-1.0));
    for (int n = 2; n < 6; ++n) CHECK(d[n] == doctest::Approx(0.0));
    CHECK(m.param_bounds[0].first == -20.0);
    CHECK(m.param_bounds[0].second == 20.0);
    CHECK(m.param_bounds[1].first == 0.0);
    CHECK(m.param_bounds[2].second == 20.0);
}

TEST_CASE("logdrift builtin basics") {
    const SdeModelSpec m = builtin_logdrift();
    CHECK(m.n_params == 2);
    CHECK(m.drift(1.0, {3.0, 1.0}) == doctest::Approx(-1.0));
    CHECK(m.diffusion(2.0, {0.0, 0.5}) == doctest::Approx(1.0));
    const ParamVector th{1.5, 0.7};
    CHECK(m.lamperti_inverse(m.lamperti(2.7, th), th) == doctest::Approx(2.7));
    CHECK(!m.in_domain(0.0));
    CHECK(!m.in_domain(-1.0));
    CHECK(m.in_domain(1e-6));
    CHECK_THROWS_AS(m.drift(-1.0, th), std::domain_error);
    CHECK_THROWS_AS(m.lamperti(0.0, th), std::domain_error);
    CHECK(m.param_bounds[0].first == -10.0);
    CHECK(m.param_bounds[1].second == 10.0);
}

TEST_CASE("doublewell builtin basics") {
    const SdeModelSpec m = builtin_doublewell();
    CHECK(m.n_params == 2);
    CHECK(m.drift(1.0, {2.5, 1.0}) == doctest::Approx(1.5));
    CHECK(m.lamperti(0.0, {0.0, 4.0}) == doctest::Approx(0.0));
    // F'(x) g(x) = 1 at x = 1.3, theta2 = 2.
    const ParamVector th{1.0, 2.0};
    const double h = 1e-6;
    const double fp = (m.lamperti(1.3 + h, th) - m.lamperti(1.3 - h, th)) / (2.0 * h);
    CHECK(fp * m.diffusion(1.3, th) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("transform identities hold across random in-bounds parameters") {
    CounterRng rng(2024, 1);
    for (const auto& m : {builtin_ou(), builtin_logdrift(), builtin_doublewell()}) {
        for (int rep = 0; rep < 8; ++rep) {
            const ParamVector th = random_theta(m, rng);
            check_model_identities(m, th);
            check_mu_derivatives_vs_fd(m, th);
        }
    }
}

TEST_CASE("diffusion positive on a state grid for random parameters") {
    CounterRng rng(77, 2);
    for (const auto& m : {builtin_ou(), builtin_logdrift(), builtin_doublewell()}) {
        for (int rep = 0; rep < 100; ++rep) {
            const ParamVector th = random_theta(m, rng);
            for (int i = 0; i < 1000; ++i) {
                const double x = state_probe(m, i / 999.0);
                CHECK(m.diffusion(x, th) > 0.0);
            }
        }
    }
}

TEST_CASE("finite-difference adapter agrees with closed forms") {
    CounterRng rng(5150, 3);
    for (const auto& base : {builtin_ou(), builtin_logdrift(), builtin_doublewell()}) {
        const SdeModelSpec fd = with_fd_drift_derivs(base);
        for (int rep = 0; rep < 4; ++rep) {
            const ParamVector th = random_theta(base, rng);
            for (int i = 2; i <= 18; i += 4) {
                const double x = state_probe(base, i / 20.0);
                const double y = base.lamperti(x, th);
                const DriftDerivs exact = base.transformed_drift_derivs(y, th);
                const DriftDerivs approx = fd.transformed_drift_derivs(y, th);
                CHECK(approx[0] == doctest::Approx(exact[0]).epsilon(1e-8));
                CHECK(approx[1] == doctest::Approx(exact[1]).epsilon(1e-5));
                const double s2 = std::max(1.0, std::abs(exact[2]));
                CHECK(approx[2] / s2 == doctest::Approx(exact[2] / s2).epsilon(1e-4));
                // Orders 3..5 are intrinsically noisier; loose sanity only.
                const double s3 = std::max(5.0, std::abs(exact[3]));
                CHECK(approx[3] / s3 == doctest::Approx(exact[3] / s3).epsilon(0.02));
            }
        }
    }
}

TEST_CASE("theta validation") {
    const SdeModelSpec m = builtin_ou();
    CHECK_THROWS_AS(m.check_theta(ParamVector{1.0}), std::invalid_argument);
    CHECK(m.in_bounds({0.0, 1.0, 1.0}));
    CHECK(!m.in_bounds({0.0, -1.0, 1.0}));
    CHECK(!m.in_bounds({0.0, 1.0, 25.0}));
}
