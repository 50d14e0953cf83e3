#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cestfit/field_context.hpp"
#include "cestfit/models/params.hpp"

namespace cestfit::models {

// One evaluation grid: offsets plus the saturation amplitude the curve was
// acquired at. omega1_radps is ignored by the Lorentzian model.
struct CurveGrid {
    std::vector<double> offsets_ppm;
    double omega1_radps = 0.0;
};

// Everything needed to evaluate a model as a flat vector function of the
// flattened parameter layout, stacking all curves in order.
struct ModelInputs {
    ModelKind kind = ModelKind::Lorentzian;
    std::size_t pool_count = 0;
    FieldContext ctx;
    std::vector<CurveGrid> curves;

    std::size_t total_points() const;
    void validate() const;
};

// Stacked model outputs (curve order, offset order within a curve). Performs
// no invariant checks on params so finite-difference probes may step
// marginally outside physical ranges without throwing.
std::vector<double> eval_model(const ModelInputs& in, std::span<const double> params);

enum class GradientMode { Analytic, FiniteDifference };
std::string to_string(GradientMode mode);

struct JacobianResult {
    Eigen::MatrixXd j; // rows = stacked outputs, cols = flattened parameters
    GradientMode mode = GradientMode::FiniteDifference;
};

// d(stacked outputs)/d(params). Analytic for the Lorentzian model; central
// finite differences with step h_j = 1e-6 * max(1, |x_j|) otherwise.
JacobianResult model_jacobian(const ModelInputs& in, std::span<const double> params);

} // namespace cestfit::models
