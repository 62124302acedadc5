#ifndef SDEC_LIKELIHOOD_HPP
#define SDEC_LIKELIHOOD_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "sdec/hermite.hpp"
#include "sdec/model.hpp"

namespace sdec {

// Equally spaced samples X(t_i), t_i = t0 + i dt.
struct UniformTimeSeries {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double time(std::size_t i) const { return t0 + dt * static_cast<double>(i); }
    double duration() const { return dt * static_cast<double>(values.size() - 1); }
    // Throws std::invalid_argument unless N >= 2, dt > 0 and all samples are
    // finite and inside the model domain.
    void validate(const SdeModelSpec& model) const;
};

// Per-cluster rows of -log p(X(t_{i+1}) | X(t_i); theta_k) on the fine grid.
// Row entry N-1 duplicates entry 0 so the row has the same length as the
// series (the last node carries no transition of its own).
struct FitnessMatrix {
    std::vector<std::vector<double>> rows; // K x N
    std::vector<std::uint64_t> floored_per_row;
    std::vector<std::uint64_t> negative_per_row;

    std::size_t clusters() const { return rows.size(); }
    std::size_t length() const { return rows.empty() ? 0 : rows[0].size(); }
};

// Fitness row for one parameter set; entries i = 0..N-2 are the transition
// misfits, entry N-1 copies entry 0. Evaluation is parallel over blocks.
std::vector<double> fitness_row(const SdeModelSpec& model, const UniformTimeSeries& series,
                                const ParamVector& theta, DensityStats* stats = nullptr);

FitnessMatrix fitness_matrix(const SdeModelSpec& model, const UniformTimeSeries& series,
                             const std::vector<ParamVector>& thetas);

// sum_{i=0}^{N-2} gamma(t_i) * (-log p(X(t_{i+1})|X(t_i); theta)) evaluated
// without materializing the row. Entries with gamma exactly 0 are skipped.
// Deterministic for any thread count (fixed-block reduction).
double weighted_fitness(const SdeModelSpec& model, const UniformTimeSeries& series,
                        const ParamVector& theta, std::span<const double> gamma_row,
                        std::size_t n_threads = 1);

// The averaged clustering functional: sum over transitions i = 0..N-2 and
// clusters k of gamma_k(t_i) * fitness[k][i]. The duplicated wrap entry is
// excluded so the first transition is not double counted.
double weighted_negloglik(const FitnessMatrix& fitness,
                          const std::vector<std::vector<double>>& gamma);

} // namespace sdec

#endif
