#ifndef SDEC_MODEL_HPP
#define SDEC_MODEL_HPP

#include <array>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace sdec {

// Parameter vector theta of a scalar SDE  dX = f(X;theta) dt + g(X;theta) dW.
struct ParamVector {
    std::vector<double> values;

    ParamVector() = default;
    ParamVector(std::initializer_list<double> v) : values(v) {}
    explicit ParamVector(std::vector<double> v) : values(std::move(v)) {}

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }
};

// Derivatives [mu, mu', mu'', mu(3), mu(4), mu(5)] of the unit-diffusion
// drift at a point of the transformed state.
using DriftDerivs = std::array<double, 6>;

// Scalar SDE model: drift/diffusion, the variance-stabilizing state
// transform F with inverse, and the transformed drift with derivatives to
// order five. Instances are immutable after construction and safe to share
// across threads.
struct SdeModelSpec {
    std::string id;
    int n_params = 0;

    std::function<double(double, const ParamVector&)> drift;
    std::function<double(double, const ParamVector&)> diffusion;    // > 0 on the state domain
    std::function<double(double, const ParamVector&)> diffusion_dx; // dg/dx
    std::function<double(double, const ParamVector&)> lamperti;     // F
    std::function<double(double, const ParamVector&)> lamperti_inverse;
    std::function<DriftDerivs(double, const ParamVector&)> transformed_drift_derivs;

    std::vector<std::pair<double, double>> param_bounds;
    double state_lo = -std::numeric_limits<double>::infinity();
    double state_hi = std::numeric_limits<double>::infinity();
    bool state_lo_open = false; // domain excludes the lower endpoint
    bool multiplicative_noise = false; // dg/dx not identically zero

    bool in_domain(double x) const {
        if (state_lo_open ? !(x > state_lo) : x < state_lo) return false;
        return x <= state_hi;
    }
    bool in_bounds(const ParamVector& theta) const;
    // Throws std::invalid_argument on size or bound violations.
    void check_theta(const ParamVector& theta) const;
    // Throws std::domain_error when x is outside the state domain.
    void check_state(double x) const;
};

// dX = (theta1 - theta2 X) dt + theta3 dW
SdeModelSpec builtin_ou();
// dX = (2 - theta1 X - ln(X^2)) dt + theta2 X dW on x > 0
SdeModelSpec builtin_logdrift();
// dX = (theta1 X - X^3) dt + theta2 sqrt(1 + X^2) dW
SdeModelSpec builtin_doublewell();

// Lookup by identifier "ou" | "logdrift" | "doublewell".
SdeModelSpec builtin_by_id(const std::string& id);

// Replaces transformed_drift_derivs with central finite differences of
// mu(y) = f/g - g_x/2 evaluated through lamperti_inverse. Lower accuracy
// than closed forms, intended for custom models and cross-checks.
SdeModelSpec with_fd_drift_derivs(SdeModelSpec base, double step = 1e-3);

} // namespace sdec

#endif
