#ifndef SDEC_GAMMA_SOLVER_HPP
#define SDEC_GAMMA_SOLVER_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace sdec {

// Fine time grid (N nodes, step dt) and its coarse counterpart (N_hat nodes,
// step dtau) used by the affiliation solver.
struct FemGrid {
    std::size_t n_fine = 0;
    std::size_t n_coarse = 0;
    double alpha = 1.0;
    double dt = 0.0;
    double dtau = 0.0;

    static FemGrid make(std::size_t n_fine, double dt, double alpha);
    // Fractional coarse coordinate of fine node i.
    double coarse_coord(std::size_t i) const {
        return static_cast<double>(i) * static_cast<double>(n_coarse - 1) /
               static_cast<double>(n_fine - 1);
    }
};

// K nonnegative weight rows over a grid; every time-node column sums to 1.
struct AffiliationMatrix {
    std::size_t grid_len = 0;
    std::vector<std::vector<double>> weights; // K rows

    std::size_t clusters() const { return weights.size(); }
    bool feasible(double tol = 1e-10) const;
    void require_feasible(const char* where) const;
};

// Reduced per-cluster fitness vectors b(tau; theta_k) on the coarse grid.
struct ReducedFitness {
    std::vector<std::vector<double>> b; // K rows of length n_coarse
};

struct QpConfig {
    double grad_tol = 1e-8;
    std::size_t max_iters = 10000;
    double bb_min = 1e-10;
    double bb_max = 1e10;
    std::size_t nonmonotone_window = 10;
    double armijo = 1e-4;
};

struct QpResult {
    AffiliationMatrix gamma;
    double objective = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

// Projects each fine-grid row onto the coarse hat-function basis:
// b_j = trapezoid-quadrature of f(t) v_j(t) over the fine grid, where v_j is
// the piecewise-linear hat centered at tau_j (half hats at the ends).
std::vector<double> reduce_fitness(std::span<const double> fitness_row, const FemGrid& grid);

// Tridiagonal curvature-penalty block (2 on the diagonal, -1 off) applied
// per cluster; y = H x.
void apply_stiffness(std::span<const double> x, std::span<double> y);

// Dense H for small sizes; used by tests and the objective cross-check.
std::vector<std::vector<double>> stiffness_dense(std::size_t n_coarse);

// Euclidean projection of a length-K column onto the probability simplex.
void project_simplex(std::span<double> column);

// Projects every time-node column of gamma onto the simplex.
AffiliationMatrix project_simplex_columns(AffiliationMatrix gamma);

// Quadratic objective (b^T gamma + eps2 * sum_k gamma_k^T H gamma_k) / N_hat.
double qp_objective(const ReducedFitness& b, double eps2, const AffiliationMatrix& gamma);

// Spectral projected gradient on the product of per-node simplexes with
// Barzilai-Borwein steps and a nonmonotone line search. gamma0 must be
// feasible.
QpResult solve_qp(const ReducedFitness& b, double eps2, const AffiliationMatrix& gamma0,
                  const QpConfig& cfg = {});

// Piecewise-linear interpolation of coarse affiliations back to the fine
// grid; columns stay on the simplex.
AffiliationMatrix interpolate_gamma(const AffiliationMatrix& gamma_coarse, const FemGrid& grid);

// Samples fine-grid affiliations at the coarse nodes (P1 interpolation onto
// the coarse grid); used to seed the QP from a fine-grid start.
AffiliationMatrix reduce_gamma_grid(const AffiliationMatrix& gamma_fine, const FemGrid& grid);

} // namespace sdec

#endif
