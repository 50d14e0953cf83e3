#pragma once

#include <cstdint>
#include <vector>

#include "cestfit/field_context.hpp"
#include "cestfit/models/bounds.hpp"
#include "cestfit/solvers/solvers.hpp"
#include "cestfit/spectrum.hpp"

namespace cestfit::solvers {

enum class InitMode { CenterOfBounds, SeededRandom };

// One target curve plus the saturation amplitude it belongs to (ignored by
// the Lorentzian model). values must live in the model's output domain:
// MTR for Lorentzian, Z for the analytical Z model, the rescaled relaxation
// ratio for MTR_Rex.
struct TargetCurve {
    MetricCurve curve;
    double omega1_radps = 0.0;
};

// Builds the squared-error objective from raw spectra per model kind:
//   Lorentzian   fits MTR of a single spectrum (exactly one B1 required)
//   AnalyticalZ  fits the Z values of every spectrum in the set
//   MtrRex       fits mtr_rex_lhs of every spectrum (positive offsets)
// Grid problems (multiple B1 for Lorentzian, asymmetric support for MTR_Rex)
// surface as GridMismatch.
Objective build_objective(models::ModelKind kind, const SpectrumSet& data,
                          std::size_t pool_count, const FieldContext& ctx);

FitResult fit(models::ModelKind kind, const SpectrumSet& data, const models::ModelBounds& mb,
              SolverKind solver, const FieldContext& ctx, const SolverConfig& cfg = {},
              InitMode init_mode = InitMode::CenterOfBounds, std::uint64_t seed = 0);

// Same protocol on pre-computed curves.
FitResult fit(models::ModelKind kind, const std::vector<TargetCurve>& curves,
              const models::ModelBounds& mb, SolverKind solver, const FieldContext& ctx,
              const SolverConfig& cfg = {}, InitMode init_mode = InitMode::CenterOfBounds,
              std::uint64_t seed = 0);

} // namespace cestfit::solvers
