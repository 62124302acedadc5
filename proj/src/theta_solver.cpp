#include "sdec/theta_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "sdec/parallel.hpp"
#include "sdec/rng.hpp"

namespace sdec {

void ThetaSolverConfig::validate() const {
    if (global_evals <= 0 || local_evals <= 0 || population <= 0)
        throw std::invalid_argument("theta solver: evaluation counts must be positive");
    if (!(rel_tol > 0.0)) throw std::invalid_argument("theta solver: rel_tol must be positive");
}

namespace {

struct Box {
    std::vector<double> lo, hi;
    std::size_t dim() const { return lo.size(); }
    void clamp(std::vector<double>& x) const {
        for (std::size_t m = 0; m < x.size(); ++m) x[m] = std::clamp(x[m], lo[m], hi[m]);
    }
};

// Bounds shrunk by a hair so open interval limits (e.g. positive diffusion
// parameters) are never evaluated exactly at the edge.
Box interior_box(const std::vector<std::pair<double, double>>& bounds) {
    Box b;
    b.lo.reserve(bounds.size());
    b.hi.reserve(bounds.size());
    for (const auto& [lo, hi] : bounds) {
        if (!(lo < hi)) throw std::invalid_argument("invalid parameter bounds");
        const double margin = 1e-9 * (hi - lo);
        b.lo.push_back(lo + margin);
        b.hi.push_back(hi - margin);
    }
    return b;
}

class BudgetedObjective {
public:
    BudgetedObjective(const std::function<double(const ParamVector&)>& fn, int budget)
        : fn_(fn), budget_(budget) {}

    bool exhausted() const { return used_ >= budget_; }
    int used() const { return used_; }
    void add_budget(int extra) { budget_ += extra; }

    double operator()(const std::vector<double>& x) {
        ++used_;
        return fn_(ParamVector(x));
    }

private:
    const std::function<double(const ParamVector&)>& fn_;
    int budget_;
    int used_ = 0;
};

// Line minimization of f(x + t d) over t in [t_lo, t_hi]: bracket by
// doubling from an adaptive step hint, then refine with successive parabolic
// interpolation (golden fallback). Updates *step_hint with the accepted
// scale; spends at most max_evals evaluations and never returns a point
// worse than f0.
double line_search(BudgetedObjective& obj, const std::vector<double>& x,
                   const std::vector<double>& d, double t_lo, double t_hi, double f0,
                   int max_evals, std::vector<double>& scratch, double* step_hint,
                   double* f_out) {
    const auto eval = [&](double t) {
        scratch = x;
        for (std::size_t m = 0; m < x.size(); ++m) scratch[m] += t * d[m];
        return obj(scratch);
    };
    const auto clip = [&](double t) { return std::clamp(t, t_lo, t_hi); };
    int used = 0;
    double t_best = 0.0, f_best = f0;
    const auto probe = [&](double t) {
        ++used;
        const double f = eval(t);
        if (f < f_best) {
            f_best = f;
            t_best = t;
        }
        return f;
    };

    // Pick a descending side, shrinking the probe if both sides ascend.
    double step = std::abs(*step_hint);
    if (!(step > 0.0)) step = 1.0;
    double a = 0.0, fa = f0;   // trailing bracket edge
    double b = 0.0, fb = f0;   // current best interior
    double c = 0.0, fc = f0;   // leading bracket edge
    bool bracketed = false;
    for (int shrink = 0; shrink < 3 && used + 2 <= max_evals && !bracketed; ++shrink) {
        const double tp = clip(step), tm = clip(-step);
        const double fp = (tp != 0.0) ? probe(tp) : f0;
        const double fm = (tm != 0.0) ? probe(tm) : f0;
        if (fp < f0 || fm < f0) {
            // Expand along the descending side until the value turns up.
            double dir = (fp <= fm) ? 1.0 : -1.0;
            double t1 = (dir > 0) ? tp : tm;
            double f1 = (dir > 0) ? fp : fm;
            a = 0.0;
            fa = f0;
            while (used < max_evals) {
                const double t2 = clip(2.0 * t1);
                if (t2 == t1) { // ran into the box
                    b = t1;
                    fb = f1;
                    c = t1;
                    fc = f1;
                    bracketed = true;
                    break;
                }
                const double f2 = probe(t2);
                if (f2 >= f1) {
                    b = t1;
                    fb = f1;
                    c = t2;
                    fc = f2;
                    bracketed = true;
                    break;
                }
                a = t1;
                fa = f1;
                t1 = t2;
                f1 = f2;
            }
            if (!bracketed) {
                b = t1;
                fb = f1;
                c = t1;
                fc = f1;
                bracketed = true;
            }
        } else {
            // Both sides ascend: the minimum lies between them.
            a = tm;
            fa = fm;
            b = 0.0;
            fb = f0;
            c = tp;
            fc = fp;
            bracketed = true;
            if (fp >= f0 && fm >= f0 && shrink + 1 < 3 && step > 1e-8) {
                // Tight probes resolve the parabola better.
                bracketed = (step <= 1e-3);
                if (!bracketed) step *= 0.125;
            }
        }
    }
    if (!bracketed || a == c) {
        *f_out = f_best;
        if (t_best != 0.0) *step_hint = std::abs(t_best);
        return t_best;
    }

    // Successive parabolic interpolation on (a, b, c), golden fallback.
    constexpr double kGolden = 0.3819660112501051;
    for (int it = 0; it < 40 && used < max_evals; ++it) {
        if (!(std::abs(c - a) > 1e-12 * (1.0 + std::abs(b)))) break;
        const double d1 = (b - a), d2 = (b - c);
        const double q1 = d1 * (fb - fc), q2 = d2 * (fb - fa);
        const double denom = 2.0 * (q1 - q2);
        double t_new;
        if (std::abs(denom) > 1e-300) {
            t_new = b - (d1 * q1 - d2 * q2) / denom;
            const double lo = std::min(a, c), hi = std::max(a, c);
            if (!(t_new > lo && t_new < hi) || std::abs(t_new - b) < 1e-14)
                t_new = b + kGolden * ((std::abs(c - b) > std::abs(a - b) ? c : a) - b);
        } else {
            t_new = b + kGolden * ((std::abs(c - b) > std::abs(a - b) ? c : a) - b);
        }
        const double f_new = probe(t_new);
        if (f_new < fb) {
            // Keep the bracket around the improved point.
            if ((t_new > b && c > b) || (t_new < b && c < b)) {
                a = b;
                fa = fb;
            } else {
                c = b;
                fc = fb;
            }
            b = t_new;
            fb = f_new;
        } else {
            if ((t_new > b && c > b) || (t_new < b && c < b)) {
                c = t_new;
                fc = f_new;
            } else {
                a = t_new;
                fa = f_new;
            }
        }
    }
    *f_out = f_best;
    if (t_best != 0.0) *step_hint = std::max(1e-10, 0.5 * std::abs(t_best));
    return t_best;
}

} // namespace

ThetaSolveResult minimize_box(const std::function<double(const ParamVector&)>& objective,
                              const std::vector<std::pair<double, double>>& bounds,
                              const ThetaSolverConfig& cfg, const ParamVector* warm_start) {
    cfg.validate();
    const Box box = interior_box(bounds);
    const std::size_t dim = box.dim();
    CounterRng rng(cfg.seed, 0x7e7a);

    // Global phase: uniform sample batch (the stored point set), then
    // controlled-random-search reflections with local mutation while the
    // evaluation budget lasts. A warm start replaces the first sample.
    const int batch = std::min(cfg.population, cfg.global_evals);
    std::vector<std::vector<double>> pts(batch, std::vector<double>(dim));
    for (auto& p : pts)
        for (std::size_t m = 0; m < dim; ++m) p[m] = rng.uniform(box.lo[m], box.hi[m]);
    if (warm_start != nullptr) {
        if (warm_start->size() != dim)
            throw std::invalid_argument("warm start has wrong dimension");
        pts[0] = warm_start->values;
        box.clamp(pts[0]);
    }
    std::vector<double> vals(batch);
    parallel_for(batch, [&](std::size_t i) { vals[i] = objective(ParamVector(pts[i])); },
                 cfg.n_threads);
    int evals = batch;

    std::size_t best_i = 0, worst_i = 0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (vals[i] < vals[best_i]) best_i = i;
        if (vals[i] > vals[worst_i]) worst_i = i;
    }

    std::vector<double> trial(dim), mutant(dim);
    while (evals < cfg.global_evals && pts.size() >= dim + 2) {
        // Reflect one random member through the centroid of dim others.
        std::vector<std::size_t> pick(dim + 1);
        for (auto& idx : pick) idx = rng.index(pts.size());
        for (std::size_t m = 0; m < dim; ++m) {
            double centroid = 0.0;
            for (std::size_t j = 0; j < dim; ++j) centroid += pts[pick[j]][m];
            centroid /= static_cast<double>(dim);
            trial[m] = 2.0 * centroid - pts[pick[dim]][m];
        }
        bool feasible = true;
        for (std::size_t m = 0; m < dim; ++m)
            if (trial[m] < box.lo[m] || trial[m] > box.hi[m]) feasible = false;

        bool accepted = false;
        if (feasible) {
            ++evals;
            const double f = objective(ParamVector(trial));
            if (f < vals[worst_i]) {
                pts[worst_i] = trial;
                vals[worst_i] = f;
                accepted = true;
            }
        }
        if (!accepted && evals < cfg.global_evals) {
            // Local mutation: reflect the rejected point around the best.
            for (std::size_t m = 0; m < dim; ++m) {
                const double w = rng.uniform();
                mutant[m] = (1.0 + w) * pts[best_i][m] - w * trial[m];
            }
            box.clamp(mutant);
            ++evals;
            const double f = objective(ParamVector(mutant));
            if (f < vals[worst_i]) {
                pts[worst_i] = mutant;
                vals[worst_i] = f;
            }
        }
        best_i = worst_i = 0;
        for (std::size_t i = 1; i < pts.size(); ++i) {
            if (vals[i] < vals[best_i]) best_i = i;
            if (vals[i] > vals[worst_i]) worst_i = i;
        }
    }

    // Local phase: direction-set polish with adaptive-step line searches;
    // the direction of largest decrease is replaced by the net sweep
    // displacement.
    BudgetedObjective budget(objective, cfg.local_evals);
    std::vector<double> x = pts[best_i];
    double fx = vals[best_i];
    std::vector<std::vector<double>> dirs(dim, std::vector<double>(dim, 0.0));
    std::vector<double> hints(dim, 0.25);
    for (std::size_t m = 0; m < dim; ++m) dirs[m][m] = 0.1 * (box.hi[m] - box.lo[m]);

    std::vector<double> scratch(dim);
    const int evals_per_line = std::max(8, cfg.local_evals / (6 * static_cast<int>(dim)));
    while (!budget.exhausted()) {
        const double f_sweep_start = fx;
        const std::vector<double> x_sweep_start = x;
        std::size_t biggest_drop_dir = 0;
        double biggest_drop = 0.0;
        for (std::size_t m = 0; m < dim && !budget.exhausted(); ++m) {
            // Feasible t-range along dirs[m] from x.
            double t_lo = -std::numeric_limits<double>::infinity();
            double t_hi = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < dim; ++j) {
                const double dj = dirs[m][j];
                if (dj == 0.0) continue;
                const double a = (box.lo[j] - x[j]) / dj;
                const double b = (box.hi[j] - x[j]) / dj;
                t_lo = std::max(t_lo, std::min(a, b));
                t_hi = std::min(t_hi, std::max(a, b));
            }
            if (!(t_lo < t_hi)) continue;
            double f_new = fx;
            const double t = line_search(budget, x, dirs[m], t_lo, t_hi, fx, evals_per_line,
                                         scratch, &hints[m], &f_new);
            if (f_new < fx) {
                if (fx - f_new > biggest_drop) {
                    biggest_drop = fx - f_new;
                    biggest_drop_dir = m;
                }
                for (std::size_t j = 0; j < dim; ++j) x[j] += t * dirs[m][j];
                box.clamp(x);
                fx = f_new;
            }
        }
        // Net displacement becomes a new search direction.
        std::vector<double> net(dim);
        double net_norm = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            net[j] = x[j] - x_sweep_start[j];
            net_norm += net[j] * net[j];
        }
        if (net_norm > 0.0 && dim > 1) {
            dirs[biggest_drop_dir] = net;
            hints[biggest_drop_dir] = 1.0;
        }

        const double rel_drop =
            (f_sweep_start - fx) / std::max(1.0, std::abs(f_sweep_start));
        if (rel_drop >= 0.0 && rel_drop <= cfg.rel_tol) break;
    }

    ThetaSolveResult r;
    r.theta = ParamVector(x);
    r.objective = fx;
    r.evaluations = evals + budget.used();
    return r;
}

ThetaSolveResult minimize_theta(const SdeModelSpec& model, const UniformTimeSeries& series,
                                std::span<const double> gamma_row, const ThetaSolverConfig& cfg,
                                const ParamVector* warm_start) {
    if (gamma_row.size() != series.size())
        throw std::invalid_argument("gamma row length does not match series");
    double mass = 0.0;
    for (double w : gamma_row) {
        if (w < -1e-12 || w > 1.0 + 1e-12)
            throw std::invalid_argument("gamma weights must lie in [0, 1]");
        mass += w;
    }
    if (mass <= 1e-12) throw std::invalid_argument("empty cluster: gamma row is all zero");

    const auto objective = [&](const ParamVector& theta) {
        return weighted_fitness(model, series, theta, gamma_row, 1);
    };
    return minimize_box(objective, model.param_bounds, cfg, warm_start);
}

} // namespace sdec
