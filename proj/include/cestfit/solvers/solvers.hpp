#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cestfit/models/bounds.hpp"
#include "cestfit/rng.hpp"
#include "cestfit/solvers/objective.hpp"

namespace cestfit::solvers {

struct SolverConfig {
    int max_iterations = 2000;
    double f_tol = 1e-9; // relative decrease
    double x_tol = 1e-9;
    int history = 10; // quasi-Newton memory

    void validate() const;
};

struct FitResult {
    std::vector<double> params;
    double objective_value = 0.0;
    int iterations = 0;
    long function_evals = 0;
    bool converged = false;
    std::string reason;        // f_tol | x_tol | projected_gradient |
                               // max_iterations | line_search_failure |
                               // all_parameters_fixed
    std::string gradient_mode; // empty for gradient-free solvers
};

enum class SolverKind { NelderMead, Powell, Lbfgsb };
std::string to_string(SolverKind kind);
SolverKind solver_kind_from_string(const std::string& name);

// Initial guesses. Center of bounds is the default protocol; the random mode
// draws uniformly inside the box (fixed coordinates stay at center).
std::vector<double> center_init(const models::ParamBounds& bounds);
std::vector<double> random_init(const models::ParamBounds& bounds, Rng& rng);

// Scalar function of the full parameter vector, and its gradient-producing
// counterpart for the quasi-Newton solver.
using ValueFn = std::function<double(std::span<const double>)>;
using ValueGradFn = std::function<Objective::ValueGrad(std::span<const double>)>;

// All solvers optimize only the free coordinates, internally rescaled so the
// box becomes [-1, 1]^n; trial points are projected onto the box before
// evaluation. Returned params satisfy the bounds elementwise and never score
// worse than init. function_evals counts callable invocations in these
// generic forms and model evaluations in the Objective forms.
FitResult nelder_mead(const ValueFn& f, const models::ParamBounds& bounds,
                      std::span<const double> init, const SolverConfig& cfg = {});
FitResult powell(const ValueFn& f, const models::ParamBounds& bounds,
                 std::span<const double> init, const SolverConfig& cfg = {});
FitResult lbfgsb(const ValueGradFn& fg, const models::ParamBounds& bounds,
                 std::span<const double> init, const SolverConfig& cfg = {});

FitResult nelder_mead(const Objective& obj, const models::ParamBounds& bounds,
                      std::span<const double> init, const SolverConfig& cfg = {});
FitResult powell(const Objective& obj, const models::ParamBounds& bounds,
                 std::span<const double> init, const SolverConfig& cfg = {});
FitResult lbfgsb(const Objective& obj, const models::ParamBounds& bounds,
                 std::span<const double> init, const SolverConfig& cfg = {});

FitResult run_solver(SolverKind kind, const Objective& obj, const models::ParamBounds& bounds,
                     std::span<const double> init, const SolverConfig& cfg = {});

} // namespace cestfit::solvers
