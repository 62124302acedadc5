#ifndef SDEC_SYNTH_HPP
#define SDEC_SYNTH_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sdec/likelihood.hpp"
#include "sdec/model.hpp"

namespace sdec {

// Fourth-order low-pass colored-noise generator: a 4-D linear SDE in
// companion form whose last component is driven by white noise, with the
// filter polynomial coefficients on the feedback row. The output u(t) is
// the first component.
struct AuxProcessConfig {
    double T_c = 15.0;  // cutoff timescale
    double b0 = 1.0;    // noise amplitude
    std::array<double, 4> a{1.0, 2.61, 3.41, 2.61};
    std::array<double, 4> x0{0.0, 0.0, 0.0, 0.0};
    double dt_internal = 1e-4;
    std::uint64_t seed = 0;
};

// Euler-Maruyama on the 4-D system, first component downsampled to dt_out.
UniformTimeSeries simulate_aux(const AuxProcessConfig& cfg, std::size_t n_out, double dt_out);

// Scalar SDE path with time-varying parameters: `substeps` internal steps
// per output sample, Euler-Maruyama or Milstein per the model's noise
// structure. theta_at(i, s) supplies the parameter vector at internal step s
// of output interval i. Increments may be injected for refinement studies.
using IncrementFn = std::function<double(std::uint64_t)>; // unit normals by index

UniformTimeSeries simulate_sde_path(const SdeModelSpec& model,
                                    const std::function<ParamVector(std::size_t, int)>& theta_at,
                                    double x0, std::size_t n_out, double dt_out, int substeps,
                                    std::uint64_t seed,
                                    const IncrementFn& increments = nullptr);

// Convenience: constant-parameter path.
UniformTimeSeries simulate_sde_path_const(const SdeModelSpec& model, const ParamVector& theta,
                                          double x0, std::size_t n_out, double dt_out,
                                          int substeps, std::uint64_t seed);

struct SyntheticDataset {
    UniformTimeSeries x;
    std::vector<UniformTimeSeries> aux;              // one or two series
    std::vector<std::vector<double>> theta_true;     // n_params x N
    std::optional<std::vector<std::size_t>> gamma_true; // hard labels, when known
    std::string model_id;
    std::string example_id;
    std::uint64_t seed = 0;
    std::uint64_t theta_clamped = 0; // scaling outputs pushed into bounds
    int retries = 0;                 // halvings after domain violations
};

struct ExampleConfig {
    std::size_t n = 0;        // 0: example default
    double dt_out = 0.0;      // 0: example default
    double dt_internal = 0.0; // 0: example default
    std::uint64_t seed = 1;
    // Auxiliary-process overrides (0 keeps the example default).
    double T_c = 0.0;
    double b0 = 0.0;
};

// The three demonstration datasets: "ou" (three modulated parameters, one
// auxiliary process), "logdrift_2aux" (two independent auxiliary processes)
// and "doublewell" (bifurcation parameter plus noise level).
SyntheticDataset generate_example(const std::string& which, const ExampleConfig& cfg);

// True scaling functions used by the examples; exposed so tests and the
// acceptance harness can compare recovered links against them.
double example_scaling(const std::string& example_id, std::size_t param_index, double u);

} // namespace sdec

#endif
