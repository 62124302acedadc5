#include "sdec/model.hpp"

#include <cmath>
#include <stdexcept>

namespace sdec {

bool SdeModelSpec::in_bounds(const ParamVector& theta) const {
    if (theta.size() != static_cast<std::size_t>(n_params)) return false;
    for (int m = 0; m < n_params; ++m) {
        if (!(theta[m] > param_bounds[m].first && theta[m] < param_bounds[m].second))
            return false;
    }
    return true;
}

void SdeModelSpec::check_theta(const ParamVector& theta) const {
    if (theta.size() != static_cast<std::size_t>(n_params))
        throw std::invalid_argument(id + ": theta has " + std::to_string(theta.size()) +
                                    " components, expected " + std::to_string(n_params));
    for (int m = 0; m < n_params; ++m) {
        if (!std::isfinite(theta[m]))
            throw std::invalid_argument(id + ": theta[" + std::to_string(m) + "] is not finite");
    }
}

void SdeModelSpec::check_state(double x) const {
    if (!std::isfinite(x) || !in_domain(x))
        throw std::domain_error(id + ": state " + std::to_string(x) + " outside domain");
}

SdeModelSpec builtin_ou() {
    SdeModelSpec m;
    m.id = "ou";
    m.n_params = 3;
    m.param_bounds = {{-20.0, 20.0}, {0.0, 20.0}, {0.0, 20.0}};
    m.multiplicative_noise = false;
    m.drift = [](double x, const ParamVector& th) { return th[0] - th[1] * x; };
    m.diffusion = [](double, const ParamVector& th) { return th[2]; };
    m.diffusion_dx = [](double, const ParamVector&) { return 0.0; };
    m.lamperti = [](double x, const ParamVector& th) { return x / th[2]; };
    m.lamperti_inverse = [](double y, const ParamVector& th) { return y * th[2]; };
    m.transformed_drift_derivs = [](double y, const ParamVector& th) {
        return DriftDerivs{(th[0] - th[1] * th[2] * y) / th[2], -th[1], 0.0, 0.0, 0.0, 0.0};
    };
    return m;
}

SdeModelSpec builtin_logdrift() {
    SdeModelSpec m;
    m.id = "logdrift";
    m.n_params = 2;
    m.param_bounds = {{-10.0, 10.0}, {0.0, 10.0}};
    m.state_lo = 0.0;
    m.state_lo_open = true;
    m.multiplicative_noise = true;
    m.drift = [](double x, const ParamVector& th) {
        if (!(x > 0.0)) throw std::domain_error("logdrift: drift needs x > 0");
        return 2.0 - th[0] * x - std::log(x * x);
    };
    m.diffusion = [](double x, const ParamVector& th) { return th[1] * x; };
    m.diffusion_dx = [](double, const ParamVector& th) { return th[1]; };
    m.lamperti = [](double x, const ParamVector& th) {
        if (!(x > 0.0)) throw std::domain_error("logdrift: transform needs x > 0");
        return std::log(x) / th[1];
    };
    m.lamperti_inverse = [](double y, const ParamVector& th) { return std::exp(th[1] * y); };
    // With x = exp(b y), b = theta2:
    //   mu(y) = (2 - 2 b y) e^{-b y} / b - theta1/b - b/2
    // and every derivative keeps the shape (a_n + c_n (2/b - 2y)) e^{-b y}.
    m.transformed_drift_derivs = [](double y, const ParamVector& th) {
        const double b = th[1];
        const double A = 2.0 / b - 2.0 * y;
        const double E = std::exp(-b * y);
        const double c0 = th[0] / b + 0.5 * b;
        DriftDerivs d;
        d[0] = A * E - c0;
        double a = -2.0, c = -b; // coefficients of mu'
        d[1] = (a + c * A) * E;
        for (int n = 2; n <= 5; ++n) {
            const double a_next = -2.0 * c - b * a;
            const double c_next = -b * c;
            a = a_next;
            c = c_next;
            d[n] = (a + c * A) * E;
        }
        return d;
    };
    return m;
}

SdeModelSpec builtin_doublewell() {
    SdeModelSpec m;
    m.id = "doublewell";
    m.n_params = 2;
    m.param_bounds = {{-10.0, 10.0}, {0.0, 10.0}};
    m.multiplicative_noise = true;
    m.drift = [](double x, const ParamVector& th) { return th[0] * x - x * x * x; };
    m.diffusion = [](double x, const ParamVector& th) { return th[1] * std::sqrt(1.0 + x * x); };
    m.diffusion_dx = [](double x, const ParamVector& th) {
        return th[1] * x / std::sqrt(1.0 + x * x);
    };
    m.lamperti = [](double x, const ParamVector& th) { return std::asinh(x) / th[1]; };
    m.lamperti_inverse = [](double y, const ParamVector& th) { return std::sinh(th[1] * y); };
    // With s = sinh(b y), c = cosh(b y), t = s/c, b = theta2:
    //   mu(y) = C t - sinh(2 b y) / (2 b),  C = (theta1 + 1)/b - b/2.
    // tanh derivatives are polynomials in t; the sinh part alternates
    // cosh/sinh with powers of 2b.
    m.transformed_drift_derivs = [](double y, const ParamVector& th) {
        const double b = th[1];
        const double C = (th[0] + 1.0) / b - 0.5 * b;
        const double t = std::tanh(b * y);
        const double t2 = t * t;
        const double sh2 = std::sinh(2.0 * b * y);
        const double ch2 = std::cosh(2.0 * b * y);
        const double T1 = 1.0 - t2;
        const double T2 = -2.0 * t * T1;
        const double T3 = T1 * (6.0 * t2 - 2.0);
        const double T4 = t * (16.0 - 40.0 * t2 + 24.0 * t2 * t2);
        const double T5 = (16.0 - 120.0 * t2 + 120.0 * t2 * t2) * T1;
        double bp = 1.0;           // b^n
        double b2p = 0.5 / b;      // (2b)^n / (2b)
        DriftDerivs d;
        d[0] = C * t - sh2 / (2.0 * b);
        const std::array<double, 5> T{T1, T2, T3, T4, T5};
        for (int n = 1; n <= 5; ++n) {
            bp *= b;
            b2p *= 2.0 * b;
            d[n] = C * bp * T[n - 1] - b2p * ((n % 2 == 1) ? ch2 : sh2);
        }
        return d;
    };
    return m;
}

SdeModelSpec builtin_by_id(const std::string& id) {
    if (id == "ou") return builtin_ou();
    if (id == "logdrift") return builtin_logdrift();
    if (id == "doublewell") return builtin_doublewell();
    throw std::invalid_argument("unknown model id: " + id);
}

SdeModelSpec with_fd_drift_derivs(SdeModelSpec base, double step) {
    const auto drift = base.drift;
    const auto diffusion = base.diffusion;
    const auto inv = base.lamperti_inverse;
    const auto mu = [drift, diffusion, inv](double y, const ParamVector& th) {
        const double x = inv(y, th);
        const double g = diffusion(x, th);
        const double h = 1e-6 * std::max(1.0, std::abs(x));
        const double gx = (diffusion(x + h, th) - diffusion(x - h, th)) / (2.0 * h);
        return drift(x, th) / g - 0.5 * gx;
    };
    base.transformed_drift_derivs = [mu, step](double y, const ParamVector& th) {
        // 9-point stencil values mu(y + k step), k = -4..4.
        std::array<double, 9> v;
        for (int k = -4; k <= 4; ++k) v[k + 4] = mu(y + k * step, th);
        const double s = step;
        DriftDerivs d;
        d[0] = v[4];
        d[1] = (v[2] - 8 * v[3] + 8 * v[5] - v[6]) / (12 * s);
        d[2] = (-v[2] + 16 * v[3] - 30 * v[4] + 16 * v[5] - v[6]) / (12 * s * s);
        d[3] = (v[1] - 8 * v[2] + 13 * v[3] - 13 * v[5] + 8 * v[6] - v[7]) / (8 * s * s * s);
        d[4] = (-v[1] + 12 * v[2] - 39 * v[3] + 56 * v[4] - 39 * v[5] + 12 * v[6] - v[7]) /
               (6 * s * s * s * s);
        d[5] = (v[0] - 9 * v[1] + 26 * v[2] - 29 * v[3] + 29 * v[5] - 26 * v[6] + 9 * v[7] -
                v[8]) /
               (6 * s * s * s * s * s);
        return d;
    };
    return base;
}

} // namespace sdec
