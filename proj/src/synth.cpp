#include "sdec/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sdec/rng.hpp"

namespace sdec {

namespace {

// One Euler-Maruyama step of the 4-D companion-form filter system. The
// feedback row is stabilizing: the polynomial coefficients act with a
// negative sign, noise enters the last component only.
inline void aux_step(std::array<double, 4>& u, const std::array<double, 4>& a, double T_c,
                     double b0, double dt, double dw) {
    const double inv = 1.0 / T_c;
    const double d0 = inv * u[1];
    const double d1 = inv * u[2];
    const double d2 = inv * u[3];
    const double d3 = -inv * (a[0] * u[0] + a[1] * u[1] + a[2] * u[2] + a[3] * u[3]);
    u[0] += d0 * dt;
    u[1] += d1 * dt;
    u[2] += d2 * dt;
    u[3] += d3 * dt + b0 * dw;
}

int substep_count(double dt_out, double dt_internal) {
    if (!(dt_internal > 0.0) || dt_internal > dt_out)
        throw std::invalid_argument("internal step must be positive and <= output step");
    return std::max(1, static_cast<int>(std::lround(dt_out / dt_internal)));
}

} // namespace

UniformTimeSeries simulate_aux(const AuxProcessConfig& cfg, std::size_t n_out, double dt_out) {
    if (n_out < 2) throw std::invalid_argument("simulate_aux: need at least 2 samples");
    const int sub = substep_count(dt_out, cfg.dt_internal);
    const double dt = dt_out / sub;
    const double sqdt = std::sqrt(dt);

    UniformTimeSeries out;
    out.t0 = 0.0;
    out.dt = dt_out;
    out.values.resize(n_out);
    std::array<double, 4> u = cfg.x0;
    out.values[0] = u[0];
    std::uint64_t ctr = 0;
    for (std::size_t i = 1; i < n_out; ++i) {
        for (int s = 0; s < sub; ++s) {
            const double dw = sqdt * counter_normal(cfg.seed, ctr++);
            aux_step(u, cfg.a, cfg.T_c, cfg.b0, dt, dw);
        }
        out.values[i] = u[0];
    }
    return out;
}

UniformTimeSeries simulate_sde_path(const SdeModelSpec& model,
                                    const std::function<ParamVector(std::size_t, int)>& theta_at,
                                    double x0, std::size_t n_out, double dt_out, int substeps,
                                    std::uint64_t seed, const IncrementFn& increments) {
    if (n_out < 2) throw std::invalid_argument("simulate_sde_path: need at least 2 samples");
    if (substeps < 1) throw std::invalid_argument("simulate_sde_path: substeps must be >= 1");
    model.check_state(x0);
    const double dt = dt_out / substeps;
    const double sqdt = std::sqrt(dt);

    UniformTimeSeries out;
    out.t0 = 0.0;
    out.dt = dt_out;
    out.values.resize(n_out);
    double x = x0;
    out.values[0] = x;
    std::uint64_t ctr = 0;
    for (std::size_t i = 1; i < n_out; ++i) {
        for (int s = 0; s < substeps; ++s) {
            const double z = increments ? increments(ctr) : counter_normal(seed, ctr);
            ++ctr;
            const double dw = sqdt * z;
            const ParamVector th = theta_at(i - 1, s);
            const double f = model.drift(x, th);
            const double g = model.diffusion(x, th);
            double x_new = x + f * dt + g * dw;
            if (model.multiplicative_noise)
                x_new += 0.5 * g * model.diffusion_dx(x, th) * (dw * dw - dt);
            if (!model.in_domain(x_new))
                throw std::domain_error("simulate_sde_path: state left the domain at output " +
                                        std::to_string(i) + " substep " + std::to_string(s));
            x = x_new;
        }
        out.values[i] = x;
    }
    return out;
}

UniformTimeSeries simulate_sde_path_const(const SdeModelSpec& model, const ParamVector& theta,
                                          double x0, std::size_t n_out, double dt_out,
                                          int substeps, std::uint64_t seed) {
    return simulate_sde_path(
        model, [&](std::size_t, int) { return theta; }, x0, n_out, dt_out, substeps, seed);
}

double example_scaling(const std::string& example_id, std::size_t param_index, double u) {
    if (example_id == "ou") {
        switch (param_index) {
            case 0: return 2.0 * u;
            case 1: {
                const double d = u - 1.0;
                return 1.0 / (d * d * d * d + 0.1);
            }
            case 2: {
                const double d = u - 1.0;
                return d * d + 0.1;
            }
            default: break;
        }
    } else if (example_id == "logdrift_2aux") {
        switch (param_index) {
            case 0: {
                const double s = u + 1.0;
                return s * s * s * s + 0.1;
            }
            case 1: return -2.0 * u + 2.0;
            default: break;
        }
    } else if (example_id == "doublewell") {
        switch (param_index) {
            case 0: {
                const double d = u - 1.0;
                return -0.4 * d * d + 2.5;
            }
            case 1: return -4.0 * u + 5.0;
            default: break;
        }
    }
    throw std::invalid_argument("example_scaling: unknown example/parameter " + example_id + "/" +
                                std::to_string(param_index));
}

namespace {

struct ExampleSpec {
    std::string model_id;
    std::size_t n_default;
    double dt_out_default;
    double dt_internal_default;
    double x0;
    std::size_t n_aux;
    // Per auxiliary process: cutoff timescale, noise level, initial state.
    std::vector<double> T_c;
    std::vector<double> b0;
    std::vector<std::array<double, 4>> aux_x0;
};

ExampleSpec example_spec(const std::string& which) {
    if (which == "ou")
        return {"ou", 16384, 0.1, 1e-4, 0.0, 1, {15.0}, {0.35}, {{1.0, 0.0, 0.0, 0.0}}};
    if (which == "logdrift_2aux")
        return {"logdrift", 131072, 0.1,  1e-4, 1.0, 2, {15.0, 60.0},
                {0.15, 0.05}, {{0.0, 0.0, 0.0, 0.0}, {0.0, 0.0, 0.0, 0.0}}};
    if (which == "doublewell")
        return {"doublewell", 65536, 0.01, 1e-4, 0.0, 1, {15.0}, {0.2},
                {{1.0, 0.0, 0.0, 0.0}}};
    throw std::invalid_argument("generate_example: unknown example " + which);
}

} // namespace

SyntheticDataset generate_example(const std::string& which, const ExampleConfig& cfg) {
    ExampleSpec ex = example_spec(which);
    const SdeModelSpec model = builtin_by_id(ex.model_id);
    const std::size_t n = cfg.n > 0 ? cfg.n : ex.n_default;
    const double dt_out = cfg.dt_out > 0.0 ? cfg.dt_out : ex.dt_out_default;
    double dt_internal = cfg.dt_internal > 0.0 ? cfg.dt_internal : ex.dt_internal_default;
    if (cfg.T_c > 0.0)
        for (auto& t : ex.T_c) t = cfg.T_c;
    if (cfg.b0 > 0.0)
        for (auto& b : ex.b0) b = cfg.b0;
    if (n < 2) throw std::invalid_argument("generate_example: need at least 2 samples");

    const std::size_t n_aux = ex.n_aux;
    const std::array<double, 4> a{1.0, 2.61, 3.41, 2.61};

    for (int attempt = 0;; ++attempt) {
        const int sub = substep_count(dt_out, dt_internal);
        const double dt = dt_out / sub;
        const double sqdt = std::sqrt(dt);

        // Independent Wiener streams: one per auxiliary process, one for X.
        std::vector<std::uint64_t> aux_seed(n_aux);
        for (std::size_t aidx = 0; aidx < n_aux; ++aidx)
            aux_seed[aidx] = mix_seed(cfg.seed, 0xa0 + aidx);
        const std::uint64_t x_seed = mix_seed(cfg.seed, 0x0f);

        std::vector<std::array<double, 4>> u(n_aux);
        for (std::size_t aidx = 0; aidx < n_aux; ++aidx) u[aidx] = ex.aux_x0[aidx];

        SyntheticDataset ds;
        ds.model_id = ex.model_id;
        ds.example_id = which;
        ds.seed = cfg.seed;
        ds.retries = attempt;
        ds.aux.assign(n_aux, UniformTimeSeries{0.0, dt_out, std::vector<double>(n)});
        ds.x.t0 = 0.0;
        ds.x.dt = dt_out;
        ds.x.values.assign(n, 0.0);

        double x = ex.x0;
        ds.x.values[0] = x;
        for (std::size_t aidx = 0; aidx < n_aux; ++aidx) ds.aux[aidx].values[0] = u[aidx][0];

        ParamVector theta;
        theta.values.assign(model.n_params, 0.0);
        std::uint64_t clamped = 0;
        std::uint64_t ctr = 0;
        bool failed = false;

        for (std::size_t i = 1; i < n && !failed; ++i) {
            for (int s = 0; s < sub; ++s) {
                // Parameters follow the current auxiliary state; clamp into
                // the admissible box when a scaling output strays.
                for (int m = 0; m < model.n_params; ++m) {
                    const std::size_t aidx = (n_aux > 1 && m == 1) ? 1 : 0;
                    double th = example_scaling(which, static_cast<std::size_t>(m), u[aidx][0]);
                    const auto& [lo, hi] = model.param_bounds[static_cast<std::size_t>(m)];
                    const double margin = 1e-6 * (hi - lo);
                    const double cl = std::clamp(th, lo + margin, hi - margin);
                    if (cl != th) ++clamped;
                    theta[m] = cl;
                }
                for (std::size_t aidx = 0; aidx < n_aux; ++aidx) {
                    const double dwu = sqdt * counter_normal(aux_seed[aidx], ctr);
                    aux_step(u[aidx], a, ex.T_c[aidx], ex.b0[aidx], dt, dwu);
                }
                const double dw = sqdt * counter_normal(x_seed, ctr);
                ++ctr;
                const double f = model.drift(x, theta);
                const double g = model.diffusion(x, theta);
                double x_new = x + f * dt + g * dw;
                if (model.multiplicative_noise)
                    x_new += 0.5 * g * model.diffusion_dx(x, theta) * (dw * dw - dt);
                if (!model.in_domain(x_new) || !std::isfinite(x_new)) {
                    failed = true;
                    break;
                }
                x = x_new;
            }
            ds.x.values[i] = x;
            for (std::size_t aidx = 0; aidx < n_aux; ++aidx) ds.aux[aidx].values[i] = u[aidx][0];
        }

        if (failed) {
            if (attempt >= 6)
                throw std::runtime_error("generate_example: path kept leaving the domain of " +
                                         ex.model_id + " down to internal step " +
                                         std::to_string(dt_internal));
            dt_internal *= 0.5;
            continue;
        }

        ds.theta_clamped = clamped;
        ds.theta_true.assign(model.n_params, std::vector<double>(n, 0.0));
        for (int m = 0; m < model.n_params; ++m) {
            const std::size_t aidx = (n_aux > 1 && m == 1) ? 1 : 0;
            for (std::size_t i = 0; i < n; ++i)
                ds.theta_true[static_cast<std::size_t>(m)][i] =
                    example_scaling(which, static_cast<std::size_t>(m), ds.aux[aidx].values[i]);
        }
        return ds;
    }
}

} // namespace sdec
