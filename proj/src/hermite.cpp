#include "sdec/hermite.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sdec {

namespace {
constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;
}

std::array<double, 7> hermite_polynomials(double z) {
    const double z2 = z * z;
    const double z3 = z2 * z;
    const double z4 = z2 * z2;
    const double z5 = z4 * z;
    const double z6 = z4 * z2;
    return {1.0,
            -z,
            z2 - 1.0,
            3.0 * z - z3,
            3.0 - 6.0 * z2 + z4,
            -15.0 * z + 10.0 * z3 - z5,
            -15.0 + 45.0 * z2 - 15.0 * z4 + z6};
}

HermiteCoefficients eta_coefficients(const SdeModelSpec& model, const ParamVector& theta,
                                     double y0, double dt) {
    const DriftDerivs d = model.transformed_drift_derivs(y0, theta);
    for (int n = 0; n < 6; ++n) {
        if (!std::isfinite(d[n]))
            throw std::runtime_error(model.id + ": drift derivative of order " +
                                     std::to_string(n) + " is not finite at y0=" +
                                     std::to_string(y0));
    }
    const double m = d[0], m1 = d[1], m2 = d[2], m3 = d[3], m4 = d[4], m5 = d[5];
    const double h = dt;
    const double h12 = std::sqrt(h);
    const double h2 = h * h;
    const double h3 = h2 * h;
    const double h32 = h * h12;
    const double h52 = h2 * h12;

    const double mm = m * m;
    const double m1m1 = m1 * m1;
    const double m2m2 = m2 * m2;

    HermiteCoefficients c;
    c.y0 = y0;
    c.eta[0] = 1.0;
    c.eta[1] = -m * h12 - (2.0 * m * m1 + m2) / 4.0 * h32 -
               (4.0 * m * m1m1 + 4.0 * mm * m2 + 6.0 * m1 * m2 + 4.0 * m * m3 + m4) / 24.0 * h52;
    c.eta[2] = (mm + m1) / 2.0 * h +
               (6.0 * mm * m1 + 4.0 * m1m1 + 7.0 * m * m2 + 2.0 * m3) / 12.0 * h2 +
               (28.0 * mm * m1m1 + 28.0 * mm * m3 + 16.0 * m1m1 * m1 + 16.0 * mm * m * m2 +
                88.0 * m * m1 * m2 + 21.0 * m2m2 + 32.0 * m1 * m3 + 16.0 * m * m4 + 3.0 * m5) /
                   96.0 * h3;
    c.eta[3] = -(mm * m + 3.0 * m * m1 + m2) / 6.0 * h32 -
               (12.0 * mm * m * m1 + 28.0 * m * m1m1 + 22.0 * mm * m2 + 24.0 * m1 * m2 +
                14.0 * m * m3 + 3.0 * m4) /
                   48.0 * h52;
    c.eta[4] = (mm * mm + 6.0 * mm * m1 + 3.0 * m1m1 + 4.0 * m * m2 + m3) / 24.0 * h2 +
               (20.0 * mm * mm * m1 + 50.0 * mm * m * m2 + 100.0 * mm * m1m1 + 50.0 * mm * m3 +
                23.0 * m * m4 + 180.0 * m * m1 * m2 + 40.0 * m1m1 * m1 + 34.0 * m2m2 +
                52.0 * m1 * m3 + 4.0 * m5) /
                   240.0 * h3;
    c.eta[5] = -(mm * mm * m + 10.0 * mm * m * m1 + 15.0 * m * m1m1 + 10.0 * mm * m2 +
                 10.0 * m1 * m2 + 5.0 * m * m3 + m4) /
               120.0 * h52;
    c.eta[6] = (mm * mm * mm + 15.0 * mm * mm * m1 + 15.0 * m1m1 * m1 + 20.0 * mm * m * m2 +
                15.0 * m1 * m3 + 45.0 * mm * m1m1 + 10.0 * m2m2 + 15.0 * mm * m3 +
                60.0 * m * m1 * m2 + 6.0 * m * m4 + m5) /
               720.0 * h3;
    return c;
}

double transition_density_with_coeffs(const SdeModelSpec& model, const HermiteCoefficients& c,
                                      double dt, double x_next, const ParamVector& theta,
                                      DensityStats* stats, int j_max) {
    const double y = model.lamperti(x_next, theta);
    const double z = (y - c.y0) / std::sqrt(dt);
    const auto H = hermite_polynomials(z);
    double series = 0.0;
    for (int j = 0; j <= j_max; ++j) series += c.eta[j] * H[j];
    const double phi = kInvSqrt2Pi * std::exp(-0.5 * z * z);
    const double g = model.diffusion(x_next, theta);
    double p = phi * series / (g * std::sqrt(dt));
    if (p < 0.0 && stats) ++stats->negative_raw;
    if (!(p >= kDensityFloor)) { // also catches NaN
        p = kDensityFloor;
        if (stats) ++stats->floored;
    }
    return p;
}

double transition_density(const SdeModelSpec& model, const DensityRequest& req,
                          DensityStats* stats) {
    if (!(req.dt > 0.0)) throw std::invalid_argument(model.id + ": dt must be positive");
    model.check_state(req.x_prev);
    model.check_state(req.x_next);
    const double y0 = model.lamperti(req.x_prev, req.theta);
    const HermiteCoefficients c = eta_coefficients(model, req.theta, y0, req.dt);
    return transition_density_with_coeffs(model, c, req.dt, req.x_next, req.theta, stats);
}

double neg_log_transition_density(const SdeModelSpec& model, const DensityRequest& req,
                                  DensityStats* stats) {
    return -std::log(transition_density(model, req, stats));
}

} // namespace sdec
