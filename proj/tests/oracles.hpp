// Independent reference computations for the test suites. Everything here is
// deliberately written from first principles (closed forms, brute force,
// quadrature) and must not call the library code paths it is used to check.
#ifndef SDEC_TESTS_ORACLES_HPP
#define SDEC_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "sdec/likelihood.hpp"
#include "sdec/rng.hpp"

namespace oracles {

inline constexpr double kPi = 3.14159265358979323846;

inline double normal_pdf(double x, double mean, double var) {
    const double d = x - mean;
    return std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * kPi * var);
}

// Exact transition density of dX = (a - b X) dt + s dW over time dt.
inline double ou_transition_density(double a, double b, double s, double dt, double x_prev,
                                    double x_next) {
    const double e = std::exp(-b * dt);
    const double mean = x_prev * e + (a / b) * (1.0 - e);
    const double var = s * s * (1.0 - e * e) / (2.0 * b);
    return normal_pdf(x_next, mean, var);
}

// Exact stationary sampler of the same process: the sampled chain is the
// AR(1) X_{i+1} = m + (X_i - m) e^{-b dt} + sd_step Z.
inline sdec::UniformTimeSeries ou_exact_series(double a, double b, double s, double dt,
                                               std::size_t n, std::uint64_t seed) {
    const double mean = a / b;
    const double stat_sd = s / std::sqrt(2.0 * b);
    const double e = std::exp(-b * dt);
    const double step_sd = s * std::sqrt((1.0 - e * e) / (2.0 * b));
    sdec::UniformTimeSeries out;
    out.t0 = 0.0;
    out.dt = dt;
    out.values.resize(n);
    double x = mean + stat_sd * sdec::counter_normal(seed, 0);
    for (std::size_t i = 0; i < n; ++i) {
        out.values[i] = x;
        x = mean + (x - mean) * e + step_sd * sdec::counter_normal(seed, i + 1);
    }
    return out;
}

// KL divergence between two univariate normals with equal variance.
inline double gaussian_kl_equal_var(double m1, double m2, double var) {
    return (m1 - m2) * (m1 - m2) / (2.0 * var);
}

// Euclidean projection of a point onto the probability simplex, verified by
// exhaustive KKT checking over active sets (K <= 20).
inline std::vector<double> simplex_projection_bruteforce(const std::vector<double>& v) {
    const std::size_t k = v.size();
    std::vector<double> best;
    double best_dist = std::numeric_limits<double>::infinity();
    // Every nonempty support set S: project onto the affine hull, require
    // nonnegativity on S and KKT multipliers off S.
    for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
        double sum = 0.0;
        int cnt = 0;
        for (std::size_t i = 0; i < k; ++i)
            if (mask & (1u << i)) {
                sum += v[i];
                ++cnt;
            }
        const double shift = (sum - 1.0) / cnt;
        std::vector<double> cand(k, 0.0);
        bool ok = true;
        for (std::size_t i = 0; i < k; ++i)
            if (mask & (1u << i)) {
                cand[i] = v[i] - shift;
                if (cand[i] < -1e-12) ok = false;
            }
        if (!ok) continue;
        double dist = 0.0;
        for (std::size_t i = 0; i < k; ++i) dist += (cand[i] - v[i]) * (cand[i] - v[i]);
        if (dist < best_dist) {
            best_dist = dist;
            best = cand;
        }
    }
    return best;
}

// Central finite differences for first/second derivatives.
template <typename Fn>
double fd1(const Fn& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}
template <typename Fn>
double fd2(const Fn& f, double x, double h) {
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

// Two-sample Kolmogorov-Smirnov p-value (asymptotic Kolmogorov law).
inline double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const std::size_t n = a.size(), m = b.size();
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < n && j < m) {
        const double x = std::min(a[i], b[j]);
        while (i < n && a[i] <= x) ++i;
        while (j < m && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    const double ne = std::sqrt(static_cast<double>(n) * m / static_cast<double>(n + m));
    const double lambda = (ne + 0.12 + 0.11 / ne) * d;
    double p = 0.0;
    for (int t = 1; t <= 100; ++t)
        p += 2.0 * ((t % 2 == 1) ? 1.0 : -1.0) * std::exp(-2.0 * t * t * lambda * lambda);
    return std::clamp(p, 0.0, 1.0);
}

// Pearson correlation.
inline double correlation(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
        sab += (a[i] - ma) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

} // namespace oracles

#endif
