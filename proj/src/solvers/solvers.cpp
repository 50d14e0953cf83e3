#include "cestfit/solvers/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include "box_space.hpp"
#include "cestfit/errors.hpp"

namespace cestfit::solvers {

void SolverConfig::validate() const {
    if (max_iterations < 1)
        throw ConfigError("SolverConfig: max_iterations must be >= 1");
    if (!(f_tol > 0.0) || !(x_tol > 0.0))
        throw ConfigError("SolverConfig: tolerances must be > 0");
    if (history < 1)
        throw ConfigError("SolverConfig: history must be >= 1");
}

std::string to_string(SolverKind kind) {
    switch (kind) {
    case SolverKind::NelderMead: return "nelder-mead";
    case SolverKind::Powell: return "powell";
    case SolverKind::Lbfgsb: return "lbfgsb";
    }
    return "unknown";
}

SolverKind solver_kind_from_string(const std::string& name) {
    if (name == "nelder-mead")
        return SolverKind::NelderMead;
    if (name == "powell")
        return SolverKind::Powell;
    if (name == "lbfgsb")
        return SolverKind::Lbfgsb;
    throw ConfigError("unknown solver: " + name);
}

std::vector<double> center_init(const models::ParamBounds& bounds) {
    bounds.validate();
    return bounds.center;
}

std::vector<double> random_init(const models::ParamBounds& bounds, Rng& rng) {
    bounds.validate();
    std::vector<double> x(bounds.size());
    for (std::size_t j = 0; j < x.size(); ++j)
        x[j] = bounds.is_fixed(j) ? bounds.center[j]
                                  : bounds.center[j] + bounds.deviation[j] * rng.uniform(-1.0, 1.0);
    return x;
}

namespace {

using detail::BestPoint;
using detail::BoxSpace;

// Evaluation adapter over the normalized coordinates with call counting.
struct Problem {
    const BoxSpace& space;
    const ValueFn* value_fn = nullptr;
    const ValueGradFn* grad_fn = nullptr;
    mutable long calls = 0;

    double value(std::span<const double> z) const {
        ++calls;
        const std::vector<double>& full = space.to_full(z);
        return value_fn ? (*value_fn)(full) : (*grad_fn)(full).value;
    }

    // Value, gradient in z coordinates, and the gradient-mode tag.
    std::tuple<double, std::vector<double>, std::string>
    value_grad(std::span<const double> z) const {
        ++calls;
        const Objective::ValueGrad vg = (*grad_fn)(space.to_full(z));
        return {vg.value, space.grad_to_z(vg.grad), models::to_string(vg.mode)};
    }
};

void check_init(const models::ParamBounds& bounds, std::span<const double> init) {
    if (init.size() != bounds.size())
        throw LengthMismatch("solver init length does not match bounds");
    if (!bounds.contains(init))
        throw ConfigError("solver init point is outside the bounds box");
}

FitResult finish(const BoxSpace& space, const Problem& problem, const BestPoint& best,
                 int iterations, bool converged, const std::string& reason,
                 const std::string& gradient_mode = {}) {
    FitResult result;
    result.params = space.to_full(best.z);
    result.objective_value = best.f;
    result.iterations = iterations;
    result.function_evals = problem.calls;
    result.converged = converged;
    result.reason = reason;
    result.gradient_mode = gradient_mode;
    return result;
}

// Degenerate but legal case: every parameter pinned by deviation == 0.
bool handle_all_fixed(const BoxSpace& space, const Problem& problem, FitResult& out) {
    if (space.dim() > 0)
        return false;
    const std::vector<double> z;
    out.params = space.to_full(z);
    out.objective_value = problem.value(z);
    out.iterations = 0;
    out.function_evals = problem.calls;
    out.converged = true;
    out.reason = "all_parameters_fixed";
    return true;
}

FitResult nelder_mead_core(const Problem& problem, const BoxSpace& space,
                           std::span<const double> init, const SolverConfig& cfg) {
    FitResult fixed_case;
    if (handle_all_fixed(space, problem, fixed_case))
        return fixed_case;

    const std::size_t n = space.dim();
    // Dimension-adaptive coefficients (expansion, contraction, shrink); they
    // reduce to the classic 2 / 0.5 / 0.5 at n == 2 and curb the premature
    // simplex collapse NM is prone to in higher dimensions.
    const double nd = static_cast<double>(std::max<std::size_t>(n, 2));
    const double kExpand = 1.0 + 2.0 / nd;
    const double kContract = 0.75 - 1.0 / (2.0 * nd);
    const double kShrink = 1.0 - 1.0 / nd;

    std::vector<std::vector<double>> simplex;
    std::vector<double> fvals;
    std::vector<double> z0 = space.to_z(init);
    BestPoint best{z0, problem.value(z0)};

    const double kStep = 0.25; // vertex displacement in box units
    double f_anchor = 0.0;     // best value when the simplex was last built

    // Oriented build: vertex i displaces coordinate i of the best point seen
    // so far in this build toward its descending side, so construction itself
    // walks down the valley like one compass-search sweep. Costs up to one
    // extra evaluation per free coordinate but orients and spreads the
    // simplex far better than a fixed-corner offset.
    auto build_simplex = [&]() {
        simplex.assign(1, z0);
        fvals.assign(1, best.f);
        std::vector<double> walk = z0;
        double f_walk = best.f;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> up = walk;
            up[i] = std::clamp(up[i] + kStep, -1.0, 1.0);
            std::vector<double> down = walk;
            down[i] = std::clamp(down[i] - kStep, -1.0, 1.0);
            bool take_up = up[i] != walk[i];
            double f_v = 0.0;
            if (take_up && down[i] != walk[i]) {
                const double f_up = problem.value(up);
                const double f_down = problem.value(down);
                best.offer(up, f_up);
                best.offer(down, f_down);
                take_up = f_up <= f_down;
                f_v = take_up ? f_up : f_down;
            } else {
                f_v = problem.value(take_up ? up : down);
                best.offer(take_up ? up : down, f_v);
            }
            fvals.push_back(f_v);
            simplex.push_back(take_up ? std::move(up) : std::move(down));
            if (f_v < f_walk) {
                walk = simplex.back();
                f_walk = f_v;
            }
        }
        f_anchor = best.f;
    };
    build_simplex();

    std::vector<std::size_t> order(simplex.size());
    int iter = 0;
    for (; iter < cfg.max_iterations; ++iter) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return fvals[a] < fvals[b]; });
        const std::size_t lo = order.front();
        const std::size_t hi = order.back();
        const std::size_t second_hi = order[order.size() - 2];

        // Collapsed when the simplex is small in both f and x; f-spread alone
        // can go quiet while the vertices still straddle the minimum.
        const bool f_small =
            fvals[hi] - fvals[lo] < cfg.f_tol * std::max(1.0, std::abs(fvals[lo]));
        double diameter = 0.0;
        for (std::size_t idx : order)
            for (std::size_t i = 0; i < n; ++i)
                diameter = std::max(diameter, std::abs(simplex[idx][i] - simplex[lo][i]));
        if (f_small && diameter < cfg.x_tol) {
            // A collapse that still made progress is usually premature in a
            // curved valley. Restart around the incumbent with a fresh,
            // flipped simplex; stop once a restart no longer pays.
            const bool improved =
                f_anchor - best.f > cfg.f_tol * std::max(1.0, std::abs(best.f));
            if (!improved || iter + 1 >= cfg.max_iterations)
                return finish(space, problem, best, iter, true, "f_tol");
            z0 = best.z;
            build_simplex();
            continue;
        }

        // Centroid of all vertices except the worst.
        std::vector<double> centroid(n, 0.0);
        for (std::size_t idx : order)
            if (idx != hi)
                for (std::size_t i = 0; i < n; ++i)
                    centroid[i] += simplex[idx][i];
        for (double& c : centroid)
            c /= static_cast<double>(n);

        auto try_point = [&](double coef) {
            std::vector<double> p(n);
            for (std::size_t i = 0; i < n; ++i)
                p[i] = centroid[i] + coef * (centroid[i] - simplex[hi][i]);
            BoxSpace::project(p);
            const double f = problem.value(p);
            best.offer(p, f);
            return std::pair{std::move(p), f};
        };

        auto [reflected, f_r] = try_point(1.0);
        if (f_r < fvals[lo]) {
            auto [expanded, f_e] = try_point(kExpand);
            if (f_e < f_r) {
                simplex[hi] = std::move(expanded);
                fvals[hi] = f_e;
            } else {
                simplex[hi] = std::move(reflected);
                fvals[hi] = f_r;
            }
            continue;
        }
        if (f_r < fvals[second_hi]) {
            simplex[hi] = std::move(reflected);
            fvals[hi] = f_r;
            continue;
        }
        // Contract toward the better of reflected/worst.
        const double coef = (f_r < fvals[hi]) ? kContract : -kContract;
        auto [contracted, f_c] = try_point(coef);
        if (f_c < std::min(f_r, fvals[hi])) {
            simplex[hi] = std::move(contracted);
            fvals[hi] = f_c;
            continue;
        }
        // Shrink everything toward the best vertex.
        for (std::size_t idx = 0; idx < simplex.size(); ++idx) {
            if (idx == lo)
                continue;
            for (std::size_t i = 0; i < n; ++i)
                simplex[idx][i] =
                    simplex[lo][i] + kShrink * (simplex[idx][i] - simplex[lo][i]);
            fvals[idx] = problem.value(simplex[idx]);
            best.offer(simplex[idx], fvals[idx]);
        }
    }
    return finish(space, problem, best, iter, false, "max_iterations");
}

// Brent minimization of phi on [a, b] (golden sections + parabolic steps).
// Returns the best abscissa; *f_out receives its value.
template <typename F>
double brent_interval(F&& phi, double a, double b, double t_tol, double* f_out) {
    constexpr double kGold = 0.3819660112501051; // (3 - sqrt(5)) / 2
    constexpr int kMaxIter = 100;
    double x = a + kGold * (b - a);
    double w = x, v = x;
    double fx = phi(x);
    double fw = fx, fv = fx;
    double d = 0.0, e = 0.0;

    for (int iter = 0; iter < kMaxIter; ++iter) {
        const double m = 0.5 * (a + b);
        const double tol = 1e-12 * std::abs(x) + t_tol;
        const double tol2 = 2.0 * tol;
        if (std::abs(x - m) <= tol2 - 0.5 * (b - a))
            break;
        double p = 0.0, q = 0.0, r = 0.0;
        bool parabolic = false;
        if (std::abs(e) > tol) {
            r = (x - w) * (fx - fv);
            q = (x - v) * (fx - fw);
            p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0)
                p = -p;
            q = std::abs(q);
            const double e_prev = e;
            e = d;
            if (std::abs(p) < std::abs(0.5 * q * e_prev) && p > q * (a - x) && p < q * (b - x)) {
                parabolic = true;
                d = p / q;
                const double u = x + d;
                if (u - a < tol2 || b - u < tol2)
                    d = (x < m) ? tol : -tol;
            }
        }
        if (!parabolic) {
            e = (x < m) ? b - x : a - x;
            d = kGold * e;
        }
        const double u = (std::abs(d) >= tol) ? x + d : x + (d > 0.0 ? tol : -tol);
        const double fu = phi(u);
        if (fu <= fx) {
            if (u < x)
                b = x;
            else
                a = x;
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if (u < x)
                a = u;
            else
                b = u;
            if (fu <= fw || w == x) {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u;
                fv = fu;
            }
        }
    }
    *f_out = fx;
    return x;
}

// Feasible step interval keeping z + t * u inside [-1, 1]^n; contains 0.
std::pair<double, double> step_interval(std::span<const double> z, std::span<const double> u) {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (u[i] == 0.0)
            continue;
        const double t1 = (-1.0 - z[i]) / u[i];
        const double t2 = (1.0 - z[i]) / u[i];
        lo = std::max(lo, std::min(t1, t2));
        hi = std::min(hi, std::max(t1, t2));
    }
    if (!std::isfinite(lo) || !std::isfinite(hi))
        return {0.0, 0.0};
    return {std::min(lo, 0.0), std::max(hi, 0.0)};
}

FitResult powell_core(const Problem& problem, const BoxSpace& space,
                      std::span<const double> init, const SolverConfig& cfg) {
    FitResult fixed_case;
    if (handle_all_fixed(space, problem, fixed_case))
        return fixed_case;

    const std::size_t n = space.dim();
    std::vector<std::vector<double>> dirs(n, std::vector<double>(n, 0.0));
    auto reset_dirs = [&] {
        for (std::size_t i = 0; i < n; ++i) {
            dirs[i].assign(n, 0.0);
            dirs[i][i] = 1.0;
        }
    };
    reset_dirs();

    std::vector<double> z = space.to_z(init);
    double f = problem.value(z);
    BestPoint best{z, f};
    double f_anchor = f; // value when the direction set was last reset

    auto line_minimize = [&](std::vector<double>& point, double f_point,
                             std::span<const double> dir) {
        const auto [t_lo, t_hi] = step_interval(point, dir);
        if (t_hi - t_lo <= 0.0)
            return f_point;
        std::vector<double> trial(point.size());
        auto phi = [&](double t) {
            for (std::size_t i = 0; i < point.size(); ++i)
                trial[i] = std::clamp(point[i] + t * dir[i], -1.0, 1.0);
            const double val = problem.value(trial);
            best.offer(trial, val);
            return val;
        };
        double f_min = 0.0;
        const double t_min = brent_interval(phi, t_lo, t_hi, cfg.x_tol, &f_min);
        if (f_min < f_point) {
            for (std::size_t i = 0; i < point.size(); ++i)
                point[i] = std::clamp(point[i] + t_min * dir[i], -1.0, 1.0);
            return f_min;
        }
        return f_point;
    };

    int iter = 0;
    for (; iter < cfg.max_iterations; ++iter) {
        const std::vector<double> z_start = z;
        const double f_start = f;
        double largest_drop = 0.0;
        std::size_t drop_index = 0;

        for (std::size_t i = 0; i < n; ++i) {
            const double f_before = f;
            f = line_minimize(z, f, dirs[i]);
            if (f_before - f > largest_drop) {
                largest_drop = f_before - f;
                drop_index = i;
            }
        }

        if (2.0 * (f_start - f) <= cfg.f_tol * (std::abs(f_start) + std::abs(f)) + 1e-300) {
            // Direction replacement can degrade the set until sweeps stall off
            // the minimum. Restart from the incumbent with fresh axes; stop
            // only when a freshly reset sweep stalls too.
            const bool improved =
                2.0 * (f_anchor - f) > cfg.f_tol * (std::abs(f_anchor) + std::abs(f)) + 1e-300;
            if (!improved || iter + 1 >= cfg.max_iterations)
                return finish(space, problem, best, iter + 1, true, "f_tol");
            if (best.f < f) {
                z = best.z;
                f = best.f;
            }
            reset_dirs();
            f_anchor = f;
            continue;
        }

        // Powell's direction update: replace the direction of largest
        // decrease with the overall displacement when the extrapolated
        // point keeps descending.
        std::vector<double> extrapolated(n);
        for (std::size_t i = 0; i < n; ++i)
            extrapolated[i] = std::clamp(2.0 * z[i] - z_start[i], -1.0, 1.0);
        const double f_extrap = problem.value(extrapolated);
        best.offer(extrapolated, f_extrap);

        if (f_extrap < f_start) {
            const double term = f_start - f - largest_drop;
            const double crit = 2.0 * (f_start - 2.0 * f + f_extrap) * term * term -
                                largest_drop * (f_start - f_extrap) * (f_start - f_extrap);
            if (crit < 0.0) {
                std::vector<double> new_dir(n);
                double norm = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    new_dir[i] = z[i] - z_start[i];
                    norm += new_dir[i] * new_dir[i];
                }
                norm = std::sqrt(norm);
                if (norm > 0.0) {
                    for (double& c : new_dir)
                        c /= norm;
                    dirs[drop_index] = dirs.back();
                    dirs.back() = new_dir;
                    f = line_minimize(z, f, dirs.back());
                }
            }
        }
    }
    return finish(space, problem, best, iter, false, "max_iterations");
}

FitResult lbfgsb_core(const Problem& problem, const BoxSpace& space,
                      std::span<const double> init, const SolverConfig& cfg) {
    FitResult fixed_case;
    if (handle_all_fixed(space, problem, fixed_case))
        return fixed_case;

    const std::size_t n = space.dim();
    std::string gradient_mode;

    std::vector<double> z = space.to_z(init);
    auto [f, g, mode0] = problem.value_grad(z);
    gradient_mode = mode0;
    BestPoint best{z, f};

    // Limited-memory curvature pairs, newest last.
    std::vector<std::vector<double>> s_hist, y_hist;
    std::vector<double> rho_hist;

    auto projected_gradient_norm = [&]() {
        double norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double step = std::clamp(z[i] - g[i], -1.0, 1.0) - z[i];
            norm = std::max(norm, std::abs(step));
        }
        return norm;
    };

    auto two_loop_direction = [&]() {
        std::vector<double> q = g;
        const std::size_t m = s_hist.size();
        std::vector<double> alpha(m);
        for (std::size_t idx = m; idx-- > 0;) {
            double dot = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                dot += s_hist[idx][i] * q[i];
            alpha[idx] = rho_hist[idx] * dot;
            for (std::size_t i = 0; i < n; ++i)
                q[i] -= alpha[idx] * y_hist[idx][i];
        }
        if (m > 0) {
            double sy = 0.0, yy = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                sy += s_hist[m - 1][i] * y_hist[m - 1][i];
                yy += y_hist[m - 1][i] * y_hist[m - 1][i];
            }
            const double gamma = sy / yy;
            for (double& qi : q)
                qi *= gamma;
        }
        for (std::size_t idx = 0; idx < m; ++idx) {
            double dot = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                dot += y_hist[idx][i] * q[i];
            const double beta = rho_hist[idx] * dot;
            for (std::size_t i = 0; i < n; ++i)
                q[i] += s_hist[idx][i] * (alpha[idx] - beta);
        }
        for (double& qi : q)
            qi = -qi;
        return q;
    };

    int iter = 0;
    for (; iter < cfg.max_iterations; ++iter) {
        if (projected_gradient_norm() < 1e-8 * std::max(1.0, std::abs(f)))
            return finish(space, problem, best, iter, true, "projected_gradient",
                          gradient_mode);

        std::vector<double> direction = two_loop_direction();

        // Backtracking Armijo search along the projection arc. Falls back to
        // steepest descent before giving up. Probes use plain values; the
        // gradient is evaluated once at the accepted point.
        const double c1 = 1e-4;
        std::vector<double> z_new(n);
        double f_new = 0.0;
        bool accepted = false;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            if (attempt == 1) {
                direction = g;
                for (double& di : direction)
                    di = -di;
            }
            double t = 1.0;
            for (int back = 0; back < 40; ++back) {
                for (std::size_t i = 0; i < n; ++i)
                    z_new[i] = std::clamp(z[i] + t * direction[i], -1.0, 1.0);
                double g_dot_step = 0.0;
                double step_norm = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    g_dot_step += g[i] * (z_new[i] - z[i]);
                    step_norm = std::max(step_norm, std::abs(z_new[i] - z[i]));
                }
                if (step_norm == 0.0 || g_dot_step >= 0.0)
                    break; // arc blocked or not a descent direction
                f_new = problem.value(z_new);
                best.offer(z_new, f_new);
                if (f_new <= f + c1 * g_dot_step) {
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
        }
        if (!accepted)
            return finish(space, problem, best, iter, false, "line_search_failure",
                          gradient_mode);

        auto [f_check, g_new, mode] = problem.value_grad(z_new);
        gradient_mode = mode;
        f_new = f_check;
        best.offer(z_new, f_new);

        double step_inf = 0.0, sy = 0.0, yy_norm = 0.0, ss_norm = 0.0;
        std::vector<double> s(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = z_new[i] - z[i];
            y[i] = g_new[i] - g[i];
            sy += s[i] * y[i];
            ss_norm += s[i] * s[i];
            yy_norm += y[i] * y[i];
            step_inf = std::max(step_inf, std::abs(s[i]));
        }
        if (sy > 1e-12 * std::sqrt(ss_norm) * std::sqrt(yy_norm)) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > cfg.history) {
                s_hist.erase(s_hist.begin());
                y_hist.erase(y_hist.begin());
                rho_hist.erase(rho_hist.begin());
            }
        }

        const double f_drop = f - f_new;
        z = z_new;
        g = g_new;
        f = f_new;

        if (f_drop >= 0.0 && f_drop < cfg.f_tol * std::max(1.0, std::abs(f)))
            return finish(space, problem, best, iter + 1, true, "f_tol", gradient_mode);
        if (step_inf < cfg.x_tol)
            return finish(space, problem, best, iter + 1, true, "x_tol", gradient_mode);
    }
    return finish(space, problem, best, iter, false, "max_iterations", gradient_mode);
}

} // namespace

FitResult nelder_mead(const ValueFn& f, const models::ParamBounds& bounds,
                      std::span<const double> init, const SolverConfig& cfg) {
    cfg.validate();
    check_init(bounds, init);
    const BoxSpace space(bounds);
    const Problem problem{space, &f, nullptr};
    return nelder_mead_core(problem, space, init, cfg);
}

FitResult powell(const ValueFn& f, const models::ParamBounds& bounds,
                 std::span<const double> init, const SolverConfig& cfg) {
    cfg.validate();
    check_init(bounds, init);
    const BoxSpace space(bounds);
    const Problem problem{space, &f, nullptr};
    return powell_core(problem, space, init, cfg);
}

FitResult lbfgsb(const ValueGradFn& fg, const models::ParamBounds& bounds,
                 std::span<const double> init, const SolverConfig& cfg) {
    cfg.validate();
    check_init(bounds, init);
    const BoxSpace space(bounds);
    const Problem problem{space, nullptr, &fg};
    return lbfgsb_core(problem, space, init, cfg);
}

namespace {

// Objective-backed runs report model evaluations, not callable invocations.
template <typename Core>
FitResult run_objective(const Objective& obj, const models::ParamBounds& bounds,
                        std::span<const double> init, const SolverConfig& cfg, Core&& core) {
    cfg.validate();
    obj.validate();
    check_init(bounds, init);
    obj.function_evals = 0;
    const BoxSpace space(bounds);
    const ValueFn f = [&obj](std::span<const double> x) { return obj.value(x); };
    const ValueGradFn fg = [&obj](std::span<const double> x) {
        return obj.value_and_gradient(x);
    };
    const Problem problem{space, &f, &fg};
    FitResult result = core(problem, space, init, cfg);
    result.function_evals = obj.function_evals;
    return result;
}

} // namespace

FitResult nelder_mead(const Objective& obj, const models::ParamBounds& bounds,
                      std::span<const double> init, const SolverConfig& cfg) {
    return run_objective(obj, bounds, init, cfg, nelder_mead_core);
}

FitResult powell(const Objective& obj, const models::ParamBounds& bounds,
                 std::span<const double> init, const SolverConfig& cfg) {
    return run_objective(obj, bounds, init, cfg, powell_core);
}

FitResult lbfgsb(const Objective& obj, const models::ParamBounds& bounds,
                 std::span<const double> init, const SolverConfig& cfg) {
    return run_objective(obj, bounds, init, cfg, lbfgsb_core);
}

FitResult run_solver(SolverKind kind, const Objective& obj, const models::ParamBounds& bounds,
                     std::span<const double> init, const SolverConfig& cfg) {
    switch (kind) {
    case SolverKind::NelderMead: return nelder_mead(obj, bounds, init, cfg);
    case SolverKind::Powell: return powell(obj, bounds, init, cfg);
    case SolverKind::Lbfgsb: return lbfgsb(obj, bounds, init, cfg);
    }
    throw ConfigError("run_solver: unknown solver kind");
}

} // namespace cestfit::solvers
