#ifndef SDEC_HERMITE_HPP
#define SDEC_HERMITE_HPP

#include <array>
#include <cstdint>

#include "sdec/model.hpp"

namespace sdec {

// Expansion order of the closed-form transition density. Fixed at build
// time; the Taylor depth of the coefficients is kExpansionOrder / 2.
inline constexpr int kExpansionOrder = 6;

// Densities below this value are clamped before being returned, keeping
// -log(p) finite (~690.8) for the optimizer.
inline constexpr double kDensityFloor = 1e-300;

struct DensityRequest {
    double dt = 0.0;
    double x_prev = 0.0;
    double x_next = 0.0;
    ParamVector theta;
};

struct HermiteCoefficients {
    std::array<double, 7> eta{}; // eta_0..eta_6
    double y0 = 0.0;             // transformed previous state
};

// Diagnostic counters a caller may pass through density evaluations.
// Plain (non-atomic) fields: use one instance per thread.
struct DensityStats {
    std::uint64_t floored = 0;      // results clamped to kDensityFloor
    std::uint64_t negative_raw = 0; // expansions that went negative pre-clamp
    void merge(const DensityStats& o) {
        floored += o.floored;
        negative_raw += o.negative_raw;
    }
};

// H_0..H_6 in the sign convention used throughout: H_j(z) = (-1)^j He_j(z),
// e.g. H_1(z) = -z, H_2(z) = z^2 - 1, H_3(z) = 3z - z^3.
std::array<double, 7> hermite_polynomials(double z);

// Taylor-expanded expansion coefficients eta_j(y0, dt; theta). Throws
// std::runtime_error naming the derivative order if a drift derivative is
// not finite.
HermiteCoefficients eta_coefficients(const SdeModelSpec& model, const ParamVector& theta,
                                     double y0, double dt);

// Transition density p_X(dt, x_next | x_prev; theta), clamped at
// kDensityFloor. Throws std::domain_error for states outside the model
// domain.
double transition_density(const SdeModelSpec& model, const DensityRequest& req,
                          DensityStats* stats = nullptr);

// Same value through precomputed coefficients; used when many x_next share
// one x_prev. j_max < 6 truncates the expansion (convergence studies).
double transition_density_with_coeffs(const SdeModelSpec& model, const HermiteCoefficients& c,
                                      double dt, double x_next, const ParamVector& theta,
                                      DensityStats* stats = nullptr, int j_max = kExpansionOrder);

// -log of the clamped transition density.
double neg_log_transition_density(const SdeModelSpec& model, const DensityRequest& req,
                                  DensityStats* stats = nullptr);

} // namespace sdec

#endif
