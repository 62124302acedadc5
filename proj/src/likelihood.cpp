#include "sdec/likelihood.hpp"

#include <cmath>
#include <stdexcept>

#include "sdec/parallel.hpp"

namespace sdec {

void UniformTimeSeries::validate(const SdeModelSpec& model) const {
    if (values.size() < 2) throw std::invalid_argument("series needs at least 2 samples");
    if (!(dt > 0.0)) throw std::invalid_argument("series dt must be positive");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i]))
            throw std::invalid_argument("series sample " + std::to_string(i) + " not finite");
        if (!model.in_domain(values[i]))
            throw std::domain_error("series sample " + std::to_string(i) + " = " +
                                    std::to_string(values[i]) + " outside " + model.id +
                                    " domain");
    }
}

std::vector<double> fitness_row(const SdeModelSpec& model, const UniformTimeSeries& series,
                                const ParamVector& theta, DensityStats* stats) {
    series.validate(model);
    model.check_theta(theta);
    const std::size_t n = series.size();
    std::vector<double> row(n, 0.0);
    const std::size_t block = 2048;
    const std::size_t n_blocks = (n - 1 + block - 1) / block;
    std::vector<DensityStats> block_stats(n_blocks);
    parallel_for(n_blocks, [&](std::size_t bi) {
        const std::size_t lo = bi * block;
        const std::size_t hi = std::min(n - 1, lo + block);
        DensityStats st;
        for (std::size_t i = lo; i < hi; ++i) {
            const double y0 = model.lamperti(series.values[i], theta);
            const HermiteCoefficients c = eta_coefficients(model, theta, y0, series.dt);
            const double p = transition_density_with_coeffs(model, c, series.dt,
                                                            series.values[i + 1], theta, &st);
            row[i] = -std::log(p);
        }
        block_stats[bi] = st;
    });
    row[n - 1] = row[0];
    if (stats)
        for (const auto& st : block_stats) stats->merge(st);
    return row;
}

FitnessMatrix fitness_matrix(const SdeModelSpec& model, const UniformTimeSeries& series,
                             const std::vector<ParamVector>& thetas) {
    FitnessMatrix f;
    f.rows.resize(thetas.size());
    f.floored_per_row.assign(thetas.size(), 0);
    f.negative_per_row.assign(thetas.size(), 0);
    for (std::size_t k = 0; k < thetas.size(); ++k) {
        DensityStats st;
        f.rows[k] = fitness_row(model, series, thetas[k], &st);
        f.floored_per_row[k] = st.floored;
        f.negative_per_row[k] = st.negative_raw;
    }
    return f;
}

double weighted_fitness(const SdeModelSpec& model, const UniformTimeSeries& series,
                        const ParamVector& theta, std::span<const double> gamma_row,
                        std::size_t n_threads) {
    if (gamma_row.size() != series.size())
        throw std::invalid_argument("gamma row length does not match series");
    const std::size_t n_trans = series.size() - 1;
    return parallel_block_sum(
        n_trans,
        [&](std::size_t i) -> double {
            const double w = gamma_row[i];
            if (w == 0.0) return 0.0;
            const double y0 = model.lamperti(series.values[i], theta);
            const HermiteCoefficients c = eta_coefficients(model, theta, y0, series.dt);
            DensityStats st;
            const double p = transition_density_with_coeffs(model, c, series.dt,
                                                            series.values[i + 1], theta, &st);
            return -w * std::log(p);
        },
        4096, n_threads);
}

double weighted_negloglik(const FitnessMatrix& fitness,
                          const std::vector<std::vector<double>>& gamma) {
    if (gamma.size() != fitness.clusters())
        throw std::invalid_argument("gamma has wrong number of clusters");
    const std::size_t n = fitness.length();
    for (const auto& g : gamma)
        if (g.size() != n) throw std::invalid_argument("gamma grid does not match fitness grid");
    double total = 0.0;
    for (std::size_t k = 0; k < gamma.size(); ++k) {
        const auto& row = fitness.rows[k];
        const auto& g = gamma[k];
        double s = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) s += g[i] * row[i];
        total += s;
    }
    return total;
}

} // namespace sdec
