#include "sdec/hyperselect.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "sdec/parallel.hpp"
#include "sdec/rng.hpp"

namespace sdec {

namespace {

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Mirror extension without repeating the edge sample: x[n-2], x[n-3], ...
void reflect_pad(std::vector<double>& x, std::size_t target) {
    const std::size_t n = x.size();
    x.reserve(target);
    std::size_t src = n >= 2 ? n - 2 : 0;
    bool down = true;
    while (x.size() < target) {
        x.push_back(x[src]);
        if (down) {
            if (src == 0)
                down = false;
            else
                --src;
        } else {
            ++src;
            if (src + 1 >= x.size()) down = true;
        }
    }
}

} // namespace

HaarBands haar_detail_bands(std::vector<double> x) {
    if (x.empty()) throw std::invalid_argument("haar: empty input");
    const std::size_t padded = next_pow2(std::max<std::size_t>(2, x.size()));
    reflect_pad(x, padded);

    HaarBands out;
    constexpr double kInvSqrt2 = 0.7071067811865475244;
    std::vector<double> approx = std::move(x);
    while (approx.size() > 1) {
        const std::size_t half = approx.size() / 2;
        std::vector<double> next(half), detail(half);
        for (std::size_t i = 0; i < half; ++i) {
            next[i] = (approx[2 * i] + approx[2 * i + 1]) * kInvSqrt2;
            detail[i] = (approx[2 * i] - approx[2 * i + 1]) * kInvSqrt2;
        }
        out.details.push_back(std::move(detail));
        approx = std::move(next);
    }
    out.approximation = approx[0];
    return out;
}

double gamma_energy(const AffiliationMatrix& gamma, double dt, int remove_levels) {
    gamma.require_feasible("gamma_energy");
    if (remove_levels < 0) throw std::invalid_argument("gamma_energy: negative filter level");
    double total = 0.0;
    for (const auto& row : gamma.weights) {
        const HaarBands bands = haar_detail_bands(row);
        if (remove_levels >= static_cast<int>(bands.details.size()))
            throw std::invalid_argument("gamma_energy: remove_levels >= available levels");
        for (std::size_t c = static_cast<std::size_t>(remove_levels); c < bands.details.size();
             ++c)
            for (double d : bands.details[c]) total += d * d;
    }
    return total * dt / static_cast<double>(gamma.clusters());
}

EnergyCurve select_eps2(const std::vector<ClusteringResult>& results, double dt) {
    if (results.empty()) throw std::invalid_argument("select_eps2: no results");
    const std::size_t k = results.front().n_clusters;
    const std::size_t n = results.front().gamma_fine.grid_len;
    for (const auto& r : results)
        if (r.n_clusters != k || r.gamma_fine.grid_len != n)
            throw std::invalid_argument("select_eps2: results disagree on K or grid");

    const std::size_t padded = next_pow2(std::max<std::size_t>(2, n));
    const int depth = static_cast<int>(std::lround(std::log2(static_cast<double>(padded))));
    const int levels = std::min(depth - 1, 9);

    EnergyCurve curve;
    curve.eps2_values.reserve(results.size());
    for (const auto& r : results) curve.eps2_values.push_back(r.eps2);
    curve.energy.assign(levels + 1, std::vector<double>(results.size(), 0.0));
    for (std::size_t i = 0; i < results.size(); ++i)
        for (int lvl = 0; lvl <= levels; ++lvl)
            curve.energy[lvl][i] = gamma_energy(results[i].gamma_fine, dt, lvl);

    curve.argmax_per_level.resize(levels + 1);
    for (int lvl = 0; lvl <= levels; ++lvl) {
        const auto& row = curve.energy[lvl];
        const std::size_t arg =
            static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
        curve.argmax_per_level[lvl] = curve.eps2_values[arg];
    }
    curve.recommended_eps2 = curve.argmax_per_level[0];
    return curve;
}

std::vector<double> stationary_density(const SdeModelSpec& model, const ParamVector& theta,
                                       const std::vector<double>& grid, int label) {
    const std::size_t n = grid.size();
    if (n < 8) throw std::invalid_argument("stationary_density: grid too small");
    const std::string who =
        model.id + (label >= 0 ? " cluster " + std::to_string(label) : "");

    // log p (unnormalized) = cumulative trapezoid of 2 f / g^2 - log g^2.
    std::vector<double> logp(n);
    double acc = 0.0;
    double prev_ratio = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = grid[i];
        const double g = model.diffusion(x, theta);
        const double g2 = g * g;
        if (!(g2 > 0.0))
            throw std::runtime_error("stationary_density: nonpositive diffusion for " + who);
        const double ratio = 2.0 * model.drift(x, theta) / g2;
        if (i > 0) acc += 0.5 * (ratio + prev_ratio) * (grid[i] - grid[i - 1]);
        prev_ratio = ratio;
        logp[i] = acc - std::log(g2);
    }
    const double peak = *std::max_element(logp.begin(), logp.end());
    if (!std::isfinite(peak))
        throw std::runtime_error("stationary_density: exponent overflow for " + who);

    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = std::exp(logp[i] - peak);
    double mass = 0.0;
    for (std::size_t i = 1; i < n; ++i)
        mass += 0.5 * (p[i] + p[i - 1]) * (grid[i] - grid[i - 1]);
    if (!(mass > 0.0) || !std::isfinite(mass))
        throw std::runtime_error("stationary_density: not normalizable for " + who);
    for (double& v : p) v /= mass;
    return p;
}

namespace {

// Mean and standard deviation of a (possibly unnormalized) density sampled
// on an ascending grid, by trapezoid moments.
void density_moments(const std::vector<double>& grid, const std::vector<double>& p, double* mean,
                     double* sd, double* edge_mass) {
    double m0 = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double dx = grid[i] - grid[i - 1];
        m0 += 0.5 * (p[i] + p[i - 1]) * dx;
        m1 += 0.5 * (p[i] * grid[i] + p[i - 1] * grid[i - 1]) * dx;
        m2 += 0.5 * (p[i] * grid[i] * grid[i] + p[i - 1] * grid[i - 1] * grid[i - 1]) * dx;
    }
    *mean = m1 / m0;
    const double var = std::max(m2 / m0 - (*mean) * (*mean), 1e-300);
    *sd = std::sqrt(var);
    const double dx0 = grid[1] - grid[0];
    *edge_mass = (p.front() + p.back()) * dx0 / m0;
}

} // namespace

std::vector<double> density_union_grid(const SdeModelSpec& model,
                                       const std::vector<ParamVector>& thetas,
                                       std::size_t points) {
    // Probe widely, measure each cluster's effective support, then span the
    // union of mean +- 8 sd intervals.
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < thetas.size(); ++c) {
        double span_lo = std::max(model.state_lo_open ? 1e-8 : model.state_lo, -50.0);
        double span_hi = std::min(model.state_hi, 50.0);
        for (int attempt = 0; attempt < 4; ++attempt) {
            std::vector<double> probe(2048);
            for (std::size_t i = 0; i < probe.size(); ++i)
                probe[i] = span_lo + (span_hi - span_lo) * static_cast<double>(i) /
                                         static_cast<double>(probe.size() - 1);
            const std::vector<double> p =
                stationary_density(model, thetas[c], probe, static_cast<int>(c));
            double mean, sd, edge;
            density_moments(probe, p, &mean, &sd, &edge);
            if (edge < 1e-6 || attempt == 3) {
                lo = std::min(lo, mean - 8.0 * sd);
                hi = std::max(hi, mean + 8.0 * sd);
                if (edge >= 1e-6)
                    throw std::runtime_error(
                        "stationary_density: support of cluster " + std::to_string(c) +
                        " does not settle inside the probe window");
                break;
            }
            const double w = span_hi - span_lo;
            span_lo = std::max(model.state_lo_open ? 1e-12 : model.state_lo, span_lo - 1.5 * w);
            span_hi = std::min(model.state_hi, span_hi + 1.5 * w);
        }
    }
    if (model.state_lo_open)
        lo = std::max(lo, 1e-12);
    else
        lo = std::max(lo, model.state_lo);
    hi = std::min(hi, model.state_hi);

    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i)
        grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    return grid;
}

std::vector<double> occupancy_weights(const AffiliationMatrix& gamma, double dt) {
    std::vector<double> nu(gamma.clusters(), 0.0);
    for (std::size_t c = 0; c < gamma.clusters(); ++c)
        nu[c] = std::accumulate(gamma.weights[c].begin(), gamma.weights[c].end(), 0.0) * dt;
    return nu;
}

double diversity(const std::vector<ParamVector>& thetas, const AffiliationMatrix& gamma,
                 const SdeModelSpec& model, double dt) {
    const std::size_t k = thetas.size();
    if (k < 2) throw std::invalid_argument("diversity: need K >= 2");
    if (gamma.clusters() != k) throw std::invalid_argument("diversity: gamma/theta mismatch");

    const std::vector<double> grid = density_union_grid(model, thetas);
    std::vector<std::vector<double>> dens(k);
    for (std::size_t c = 0; c < k; ++c)
        dens[c] = stationary_density(model, thetas[c], grid, static_cast<int>(c));

    const std::vector<double> nu = occupancy_weights(gamma, dt);

    // Trapezoid weights shared by normalization and the divergence integral,
    // so KL >= 0 holds exactly.
    const std::size_t n = grid.size();
    std::vector<double> w(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
        const double dx = grid[i] - grid[i - 1];
        w[i - 1] += 0.5 * dx;
        w[i] += 0.5 * dx;
    }
    for (std::size_t c = 0; c < k; ++c) {
        double mass = 0.0;
        for (std::size_t i = 0; i < n; ++i) mass += w[i] * dens[c][i];
        for (double& v : dens[c]) v /= mass;
    }

    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j) continue;
            double kl = 0.0;
            for (std::size_t g = 0; g < n; ++g) {
                const double pi = std::max(dens[i][g], 1e-300);
                const double pj = std::max(dens[j][g], 1e-300);
                if (dens[i][g] > 0.0) kl += w[g] * dens[i][g] * std::log(pi / pj);
            }
            total += nu[j] * std::max(kl, 0.0);
        }
    }
    return total;
}

UniformTimeSeries reflected_wiener(std::size_t n, double dt, double lo, double hi, double scale,
                                   std::uint64_t seed) {
    if (!(lo < hi)) throw std::invalid_argument("reflected_wiener: need lo < hi");
    if (scale < 0.0) throw std::invalid_argument("reflected_wiener: negative scale");
    UniformTimeSeries s;
    s.t0 = 0.0;
    s.dt = dt;
    s.values.resize(n);
    const double sqdt = std::sqrt(dt);
    double x = 0.5 * (lo + hi);
    for (std::size_t i = 0; i < n; ++i) {
        s.values[i] = x;
        x += scale * sqdt * counter_normal(seed, i);
        // Fold back into [lo, hi] as often as needed.
        while (x < lo || x > hi) {
            if (x > hi) x = 2.0 * hi - x;
            if (x < lo) x = 2.0 * lo - x;
            if (!std::isfinite(x)) x = 0.5 * (lo + hi);
        }
    }
    return s;
}

DiversityReport gap_statistic(const SdeModelSpec& model, const UniformTimeSeries& series,
                              const std::vector<std::size_t>& k_values,
                              const GapStatisticConfig& cfg) {
    if (k_values.empty()) throw std::invalid_argument("gap_statistic: no K values");
    for (std::size_t k : k_values)
        if (k < 2) throw std::invalid_argument("gap_statistic: K must be >= 2");
    if (cfg.replicates < 1) throw std::invalid_argument("gap_statistic: need B >= 1");

    // Reference processes share the data's range and one-step increment
    // scale.
    const auto [mn_it, mx_it] = std::minmax_element(series.values.begin(), series.values.end());
    double inc_var = 0.0;
    for (std::size_t i = 1; i < series.size(); ++i) {
        const double d = series.values[i] - series.values[i - 1];
        inc_var += d * d;
    }
    inc_var /= static_cast<double>(series.size() - 1);
    const double scale = std::sqrt(inc_var / series.dt);

    std::vector<UniformTimeSeries> refs(static_cast<std::size_t>(cfg.replicates));
    for (int b = 0; b < cfg.replicates; ++b)
        refs[static_cast<std::size_t>(b)] =
            reflected_wiener(series.size(), series.dt, *mn_it, *mx_it, scale,
                             mix_seed(cfg.subspace.seed, 0xb00 + static_cast<std::uint64_t>(b)));

    DiversityReport rep;
    rep.k_values = k_values;
    rep.replicates = cfg.replicates;
    rep.logW.resize(k_values.size());
    rep.logW_ref_mean.resize(k_values.size());
    rep.gap.resize(k_values.size());

    const auto cluster_diversity = [&](const UniformTimeSeries& data, std::size_t k) {
        const ClusteringResult r = run_subspace(model, data, k, cfg.eps2, cfg.subspace);
        const double w = diversity(r.theta, r.gamma_fine, model, data.dt);
        return std::log(std::max(w, 1e-300));
    };

    for (std::size_t ki = 0; ki < k_values.size(); ++ki) {
        const std::size_t k = k_values[ki];
        rep.logW[ki] = cluster_diversity(series, k);

        std::vector<double> ref_logs(refs.size(),
                                     std::numeric_limits<double>::quiet_NaN());
        std::vector<std::string> errors(refs.size());
        parallel_for(refs.size(), [&](std::size_t b) {
            try {
                ref_logs[b] = cluster_diversity(refs[b], k);
            } catch (const std::exception& e) {
                errors[b] = e.what();
            }
        });
        double sum = 0.0;
        int ok = 0;
        for (std::size_t b = 0; b < refs.size(); ++b) {
            if (std::isnan(ref_logs[b])) {
                rep.failures.push_back("K=" + std::to_string(k) + " replicate " +
                                       std::to_string(b) + ": " + errors[b]);
            } else {
                sum += ref_logs[b];
                ++ok;
            }
        }
        if (ok * 2 < cfg.replicates)
            throw std::runtime_error("gap_statistic: more than half the reference runs failed at K=" +
                                     std::to_string(k));
        rep.logW_ref_mean[ki] = sum / static_cast<double>(ok);
        rep.gap[ki] = rep.logW_ref_mean[ki] - rep.logW[ki];
    }

    std::size_t best = 0;
    for (std::size_t ki = 1; ki < k_values.size(); ++ki)
        if (rep.gap[ki] < rep.gap[best]) best = ki; // ties keep the smaller K
    rep.recommended_k = rep.k_values[best];
    return rep;
}

} // namespace sdec
