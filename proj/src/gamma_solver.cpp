#include "sdec/gamma_solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <stdexcept>

namespace sdec {

FemGrid FemGrid::make(std::size_t n_fine, double dt, double alpha) {
    if (n_fine < 2) throw std::invalid_argument("fem grid: need at least 2 fine nodes");
    if (!(dt > 0.0)) throw std::invalid_argument("fem grid: dt must be positive");
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("fem grid: alpha must lie in (0, 1]");
    FemGrid g;
    g.n_fine = n_fine;
    g.dt = dt;
    g.alpha = alpha;
    g.n_coarse = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::lround(alpha * static_cast<double>(n_fine))));
    g.n_coarse = std::min(g.n_coarse, n_fine);
    g.dtau = static_cast<double>(n_fine - 1) * dt / static_cast<double>(g.n_coarse - 1);
    return g;
}

bool AffiliationMatrix::feasible(double tol) const {
    if (weights.empty()) return false;
    for (const auto& row : weights)
        if (row.size() != grid_len) return false;
    for (std::size_t j = 0; j < grid_len; ++j) {
        double sum = 0.0;
        for (const auto& row : weights) {
            const double w = row[j];
            if (!(w >= -tol && w <= 1.0 + tol)) return false;
            sum += w;
        }
        if (std::abs(sum - 1.0) > tol) return false;
    }
    return true;
}

void AffiliationMatrix::require_feasible(const char* where) const {
    if (!feasible())
        throw std::invalid_argument(std::string(where) + ": affiliation matrix infeasible");
}

std::vector<double> reduce_fitness(std::span<const double> fitness_row, const FemGrid& grid) {
    if (fitness_row.size() != grid.n_fine)
        throw std::invalid_argument("reduce_fitness: row length does not match grid");
    std::vector<double> b(grid.n_coarse, 0.0);
    const std::size_t n = grid.n_fine;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = (i == 0 || i == n - 1) ? 0.5 * grid.dt : grid.dt;
        const double s = grid.coarse_coord(i);
        std::size_t j = static_cast<std::size_t>(s);
        if (j >= grid.n_coarse - 1) j = grid.n_coarse - 2;
        const double frac = s - static_cast<double>(j);
        const double fw = w * fitness_row[i];
        b[j] += fw * (1.0 - frac);
        b[j + 1] += fw * frac;
    }
    return b;
}

void apply_stiffness(std::span<const double> x, std::span<double> y) {
    const std::size_t n = x.size();
    for (std::size_t j = 0; j < n; ++j) {
        double v = 2.0 * x[j];
        if (j > 0) v -= x[j - 1];
        if (j + 1 < n) v -= x[j + 1];
        y[j] = v;
    }
}

std::vector<std::vector<double>> stiffness_dense(std::size_t n_coarse) {
    std::vector<std::vector<double>> h(n_coarse, std::vector<double>(n_coarse, 0.0));
    for (std::size_t j = 0; j < n_coarse; ++j) {
        h[j][j] = 2.0;
        if (j > 0) h[j][j - 1] = -1.0;
        if (j + 1 < n_coarse) h[j][j + 1] = -1.0;
    }
    return h;
}

void project_simplex(std::span<double> column) {
    const std::size_t k = column.size();
    if (k == 1) {
        column[0] = 1.0;
        return;
    }
    // Sort-based projection: find the largest prefix with positive shifted
    // values, then clip.
    static thread_local std::vector<double> sorted;
    sorted.assign(column.begin(), column.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double prefix = 0.0, tau = 0.0;
    std::size_t rho = 0;
    for (std::size_t j = 0; j < k; ++j) {
        prefix += sorted[j];
        const double candidate = (prefix - 1.0) / static_cast<double>(j + 1);
        if (sorted[j] - candidate > 0.0) {
            rho = j + 1;
            tau = candidate;
        }
    }
    for (std::size_t j = 0; j < k; ++j) column[j] = std::max(0.0, column[j] - tau);
    (void)rho;
}

AffiliationMatrix project_simplex_columns(AffiliationMatrix gamma) {
    const std::size_t k = gamma.clusters();
    std::vector<double> col(k);
    for (std::size_t j = 0; j < gamma.grid_len; ++j) {
        for (std::size_t c = 0; c < k; ++c) col[c] = gamma.weights[c][j];
        project_simplex(col);
        for (std::size_t c = 0; c < k; ++c) gamma.weights[c][j] = col[c];
    }
    return gamma;
}

double qp_objective(const ReducedFitness& b, double eps2, const AffiliationMatrix& gamma) {
    const std::size_t k = gamma.clusters();
    const std::size_t n = gamma.grid_len;
    if (b.b.size() != k) throw std::invalid_argument("qp: fitness/gamma cluster mismatch");
    double lin = 0.0, quad = 0.0;
    std::vector<double> hx(n);
    for (std::size_t c = 0; c < k; ++c) {
        if (b.b[c].size() != n) throw std::invalid_argument("qp: fitness/gamma grid mismatch");
        lin += std::inner_product(b.b[c].begin(), b.b[c].end(), gamma.weights[c].begin(), 0.0);
        apply_stiffness(gamma.weights[c], hx);
        quad += std::inner_product(hx.begin(), hx.end(), gamma.weights[c].begin(), 0.0);
    }
    return (lin + eps2 * quad) / static_cast<double>(n);
}

namespace {

void qp_gradient(const ReducedFitness& b, double eps2, const AffiliationMatrix& gamma,
                 std::vector<std::vector<double>>& grad) {
    const std::size_t k = gamma.clusters();
    const std::size_t n = gamma.grid_len;
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t c = 0; c < k; ++c) {
        apply_stiffness(gamma.weights[c], grad[c]);
        for (std::size_t j = 0; j < n; ++j)
            grad[c][j] = scale * (b.b[c][j] + 2.0 * eps2 * grad[c][j]);
    }
}

void project_columns_inplace(std::vector<std::vector<double>>& w, std::size_t n) {
    const std::size_t k = w.size();
    std::vector<double> col(k);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t c = 0; c < k; ++c) col[c] = w[c][j];
        project_simplex(col);
        for (std::size_t c = 0; c < k; ++c) w[c][j] = col[c];
    }
}

} // namespace

QpResult solve_qp(const ReducedFitness& b, double eps2, const AffiliationMatrix& gamma0,
                  const QpConfig& cfg) {
    if (eps2 < 0.0) throw std::invalid_argument("qp: eps2 must be nonnegative");
    gamma0.require_feasible("solve_qp");
    const std::size_t k = gamma0.clusters();
    const std::size_t n = gamma0.grid_len;

    AffiliationMatrix gamma = gamma0;
    std::vector<std::vector<double>> grad(k, std::vector<double>(n));
    std::vector<std::vector<double>> trial(k, std::vector<double>(n));
    std::vector<std::vector<double>> grad_trial(k, std::vector<double>(n));
    AffiliationMatrix cand;
    cand.grid_len = n;
    cand.weights.assign(k, std::vector<double>(n));

    double f = qp_objective(b, eps2, gamma);
    qp_gradient(b, eps2, gamma, grad);
    std::deque<double> recent{f};

    double bb_step = 1.0;
    QpResult out;
    std::size_t it = 0;
    for (; it < cfg.max_iters; ++it) {
        // Stationarity measure: || P(gamma - grad) - gamma ||_inf.
        for (std::size_t c = 0; c < k; ++c)
            for (std::size_t j = 0; j < n; ++j)
                trial[c][j] = gamma.weights[c][j] - grad[c][j];
        project_columns_inplace(trial, n);
        double pg_norm_inf = 0.0;
        for (std::size_t c = 0; c < k; ++c)
            for (std::size_t j = 0; j < n; ++j)
                pg_norm_inf =
                    std::max(pg_norm_inf, std::abs(trial[c][j] - gamma.weights[c][j]));
        if (pg_norm_inf < cfg.grad_tol) {
            out.converged = true;
            break;
        }

        // Projected-gradient direction with the spectral step.
        for (std::size_t c = 0; c < k; ++c)
            for (std::size_t j = 0; j < n; ++j)
                trial[c][j] = gamma.weights[c][j] - bb_step * grad[c][j];
        project_columns_inplace(trial, n);
        double dir_dot_grad = 0.0;
        for (std::size_t c = 0; c < k; ++c)
            for (std::size_t j = 0; j < n; ++j)
                dir_dot_grad += (trial[c][j] - gamma.weights[c][j]) * grad[c][j];

        // Nonmonotone Armijo backtracking along gamma + t (trial - gamma).
        const double f_ref = *std::max_element(recent.begin(), recent.end());
        double t = 1.0;
        double f_new = 0.0;
        for (int ls = 0; ls < 60; ++ls) {
            for (std::size_t c = 0; c < k; ++c)
                for (std::size_t j = 0; j < n; ++j)
                    cand.weights[c][j] =
                        gamma.weights[c][j] + t * (trial[c][j] - gamma.weights[c][j]);
            f_new = qp_objective(b, eps2, cand);
            if (f_new <= f_ref + cfg.armijo * t * dir_dot_grad) break;
            t *= 0.5;
        }

        qp_gradient(b, eps2, cand, grad_trial);

        // Barzilai-Borwein step from the accepted move.
        double sts = 0.0, sty = 0.0;
        for (std::size_t c = 0; c < k; ++c)
            for (std::size_t j = 0; j < n; ++j) {
                const double s = cand.weights[c][j] - gamma.weights[c][j];
                const double y = grad_trial[c][j] - grad[c][j];
                sts += s * s;
                sty += s * y;
            }
        bb_step = (sty > 0.0) ? std::clamp(sts / sty, cfg.bb_min, cfg.bb_max) : cfg.bb_max;

        gamma.weights.swap(cand.weights);
        grad.swap(grad_trial);
        f = f_new;
        recent.push_back(f);
        if (recent.size() > cfg.nonmonotone_window) recent.pop_front();
    }

    out.gamma = std::move(gamma);
    out.objective = qp_objective(b, eps2, out.gamma);
    out.iterations = it;
    return out;
}

AffiliationMatrix interpolate_gamma(const AffiliationMatrix& gamma_coarse, const FemGrid& grid) {
    if (gamma_coarse.grid_len != grid.n_coarse)
        throw std::invalid_argument("interpolate_gamma: coarse grid mismatch");
    gamma_coarse.require_feasible("interpolate_gamma");
    AffiliationMatrix fine;
    fine.grid_len = grid.n_fine;
    fine.weights.assign(gamma_coarse.clusters(), std::vector<double>(grid.n_fine));
    for (std::size_t i = 0; i < grid.n_fine; ++i) {
        const double s = grid.coarse_coord(i);
        std::size_t j = static_cast<std::size_t>(s);
        if (j >= grid.n_coarse - 1) j = grid.n_coarse - 2;
        const double frac = s - static_cast<double>(j);
        for (std::size_t c = 0; c < gamma_coarse.clusters(); ++c)
            fine.weights[c][i] = (1.0 - frac) * gamma_coarse.weights[c][j] +
                                 frac * gamma_coarse.weights[c][j + 1];
    }
    return fine;
}

AffiliationMatrix reduce_gamma_grid(const AffiliationMatrix& gamma_fine, const FemGrid& grid) {
    if (gamma_fine.grid_len != grid.n_fine)
        throw std::invalid_argument("reduce_gamma_grid: fine grid mismatch");
    AffiliationMatrix coarse;
    coarse.grid_len = grid.n_coarse;
    coarse.weights.assign(gamma_fine.clusters(), std::vector<double>(grid.n_coarse));
    const double scale =
        static_cast<double>(grid.n_fine - 1) / static_cast<double>(grid.n_coarse - 1);
    for (std::size_t j = 0; j < grid.n_coarse; ++j) {
        const double s = scale * static_cast<double>(j);
        std::size_t i = static_cast<std::size_t>(s);
        if (i >= grid.n_fine - 1) i = grid.n_fine - 2;
        const double frac = s - static_cast<double>(i);
        for (std::size_t c = 0; c < gamma_fine.clusters(); ++c)
            coarse.weights[c][j] = (1.0 - frac) * gamma_fine.weights[c][i] +
                                   frac * gamma_fine.weights[c][i + 1];
    }
    return coarse;
}

} // namespace sdec
