#include "sdec/closure.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sdec/rng.hpp"

namespace sdec {

double ScalingFunction::operator()(double u) const {
    const double uc = std::clamp(u, u_min, u_max);
    double acc = 0.0;
    for (std::size_t d = coeffs.size(); d-- > 0;) acc = acc * uc + coeffs[d];
    return acc;
}

double cluster_weighted_mean(std::span<const double> u, std::span<const double> gamma_k) {
    if (u.size() != gamma_k.size())
        throw std::invalid_argument("cluster_weighted_mean: length mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        num += u[i] * gamma_k[i];
        den += gamma_k[i];
    }
    if (!(den > 0.0))
        throw std::invalid_argument("cluster_weighted_mean: empty cluster (zero weight mass)");
    return num / den;
}

std::vector<double> fit_scaling(std::span<const double> u_bars,
                                std::span<const double> theta_component, int degree) {
    const std::size_t k = u_bars.size();
    if (theta_component.size() != k)
        throw std::invalid_argument("fit_scaling: point count mismatch");
    if (degree < 0) throw std::invalid_argument("fit_scaling: negative degree");
    if (k <= static_cast<std::size_t>(degree))
        throw std::invalid_argument(
            "fit_scaling: need more points than the degree; lower the degree");

    Eigen::MatrixXd design(k, degree + 1);
    Eigen::VectorXd rhs(k);
    for (std::size_t i = 0; i < k; ++i) {
        double pow = 1.0;
        for (int d = 0; d <= degree; ++d) {
            design(static_cast<Eigen::Index>(i), d) = pow;
            pow *= u_bars[i];
        }
        rhs(static_cast<Eigen::Index>(i)) = theta_component[i];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < degree + 1)
        throw std::invalid_argument(
            "fit_scaling: rank-deficient design (coincident points); lower the degree");
    const Eigen::VectorXd c = qr.solve(rhs);
    return std::vector<double>(c.data(), c.data() + c.size());
}

ClosureFit fit_closure(const ClusteringResult& result, const std::vector<UniformTimeSeries>& aux,
                       const std::vector<int>& aux_index_per_param,
                       const std::vector<int>& degrees, double min_occupancy) {
    const std::size_t k = result.n_clusters;
    const std::size_t n_params = result.theta.empty() ? 0 : result.theta[0].size();
    if (aux.empty()) throw std::invalid_argument("fit_closure: no auxiliary series");
    if (aux_index_per_param.size() != n_params || degrees.size() != n_params)
        throw std::invalid_argument("fit_closure: per-parameter settings mismatch");
    for (int idx : aux_index_per_param)
        if (idx < 0 || static_cast<std::size_t>(idx) >= aux.size())
            throw std::invalid_argument("fit_closure: auxiliary index out of range");
    for (const auto& a : aux)
        if (a.size() != result.gamma_fine.grid_len)
            throw std::invalid_argument("fit_closure: auxiliary grid mismatch");

    // Occupancy filter: weakly populated clusters carry no reliable
    // parameter estimate and are excluded from the regressions.
    const double dt = aux[0].dt;
    std::vector<double> nu(k, 0.0);
    for (std::size_t c = 0; c < k; ++c)
        for (double w : result.gamma_fine.weights[c]) nu[c] += w * dt;
    const double horizon = dt * static_cast<double>(result.gamma_fine.grid_len);
    std::vector<std::size_t> kept;
    for (std::size_t c = 0; c < k; ++c)
        if (nu[c] > min_occupancy * horizon) kept.push_back(c);
    if (kept.empty()) throw std::invalid_argument("fit_closure: all clusters below occupancy cut");

    ClosureFit fit;
    fit.u_bars.assign(aux.size(), std::vector<double>(k, 0.0));
    fit.theta_bars = result.theta;
    for (std::size_t a = 0; a < aux.size(); ++a)
        for (std::size_t c = 0; c < k; ++c)
            fit.u_bars[a][c] =
                cluster_weighted_mean(aux[a].values, result.gamma_fine.weights[c]);

    fit.scaling.resize(n_params);
    fit.residual_rms.assign(n_params, 0.0);
    for (std::size_t m = 0; m < n_params; ++m) {
        const int a = aux_index_per_param[m];
        std::vector<double> us, ths;
        us.reserve(kept.size());
        ths.reserve(kept.size());
        for (std::size_t c : kept) {
            us.push_back(fit.u_bars[static_cast<std::size_t>(a)][c]);
            ths.push_back(result.theta[c][m]);
        }
        ScalingFunction s;
        s.aux_index = a;
        s.coeffs = fit_scaling(us, ths, degrees[m]);
        s.u_min = *std::min_element(us.begin(), us.end());
        s.u_max = *std::max_element(us.begin(), us.end());
        fit.scaling[m] = s;
        double rss = 0.0;
        for (std::size_t i = 0; i < us.size(); ++i) {
            const double r = ths[i] - s(us[i]);
            rss += r * r;
        }
        fit.residual_rms[m] = std::sqrt(rss / static_cast<double>(us.size()));
    }
    return fit;
}

std::vector<std::vector<double>> reconstruct_theta_path(const ClusteringResult& result) {
    const std::size_t k = result.n_clusters;
    const std::size_t n = result.gamma_fine.grid_len;
    const std::size_t n_params = result.theta.empty() ? 0 : result.theta[0].size();
    std::vector<std::vector<double>> path(n_params, std::vector<double>(n, 0.0));
    for (std::size_t m = 0; m < n_params; ++m)
        for (std::size_t c = 0; c < k; ++c) {
            const double th = result.theta[c][m];
            const auto& g = result.gamma_fine.weights[c];
            for (std::size_t i = 0; i < n; ++i) path[m][i] += th * g[i];
        }
    return path;
}

UniformTimeSeries simulate_closed(const SdeModelSpec& model, const ClosureFit& closure,
                                  const std::vector<UniformTimeSeries>& aux,
                                  const ClosedSimConfig& cfg, ClosedSimStats* stats) {
    if (aux.empty()) throw std::invalid_argument("simulate_closed: no auxiliary series");
    const std::size_t n = aux[0].size();
    for (const auto& a : aux)
        if (a.size() != n) throw std::invalid_argument("simulate_closed: grids disagree");
    if (cfg.substeps < 1) throw std::invalid_argument("simulate_closed: substeps must be >= 1");
    const std::size_t n_params = closure.scaling.size();
    if (static_cast<int>(n_params) != model.n_params)
        throw std::invalid_argument("simulate_closed: closure does not match the model");

    const double dt_out = aux[0].dt;
    const double dt = dt_out / cfg.substeps;
    ClosedSimStats local{};
    ParamVector theta;
    theta.values.assign(n_params, 0.0);

    const auto theta_at = [&](double frac_index) {
        // Linear interpolation of each auxiliary series, then the scalings.
        for (std::size_t m = 0; m < n_params; ++m) {
            const auto& s = closure.scaling[m];
            const auto& u = aux[static_cast<std::size_t>(s.aux_index)].values;
            std::size_t i = static_cast<std::size_t>(frac_index);
            if (i >= u.size() - 1) i = u.size() - 2;
            const double w = frac_index - static_cast<double>(i);
            const double uv = (1.0 - w) * u[i] + w * u[i + 1];
            double th = s(uv);
            const auto& [lo, hi] = model.param_bounds[m];
            const double margin = 1e-9 * (hi - lo);
            const double clamped = std::clamp(th, lo + margin, hi - margin);
            if (clamped != th) ++local.theta_clamped;
            theta[m] = clamped;
        }
        return theta;
    };

    UniformTimeSeries out;
    out.t0 = aux[0].t0;
    out.dt = dt_out;
    out.values.resize(n);
    double x = cfg.x0;
    out.values[0] = x;
    const double sqdt = std::sqrt(dt);
    std::uint64_t ctr = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (int s = 0; s < cfg.substeps; ++s) {
            const double frac =
                static_cast<double>(i) + static_cast<double>(s) / cfg.substeps;
            const ParamVector& th = theta_at(frac);
            const double dw = sqdt * counter_normal(cfg.seed, ctr++);
            const double f = model.drift(x, th);
            const double g = model.diffusion(x, th);
            double x_new = x + f * dt + g * dw;
            if (model.multiplicative_noise) {
                const double gx = model.diffusion_dx(x, th);
                x_new += 0.5 * g * gx * (dw * dw - dt);
            }
            if (!model.in_domain(x_new)) {
                // Reflect at the boundary rather than aborting the path.
                if (model.state_lo_open && x_new <= model.state_lo) {
                    x_new = 2.0 * model.state_lo - x_new;
                    if (!(x_new > model.state_lo)) x_new = model.state_lo + 1e-12;
                } else {
                    x_new = std::clamp(x_new, model.state_lo, model.state_hi);
                }
                ++local.state_reflected;
            }
            x = x_new;
        }
        out.values[i + 1] = x;
    }
    if (stats) *stats = local;
    return out;
}

} // namespace sdec
