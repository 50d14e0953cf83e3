#pragma once

#include <vector>

#include "cestfit/field_context.hpp"
#include "cestfit/models/params.hpp"
#include "cestfit/neural/tape.hpp"

namespace cestfit::neural {

// Differentiable counterpart of the model forward: maps a 1 x P flattened
// parameter row to one 1 x N output row per curve, entirely in tape ops so
// the reconstruction loss backpropagates through the physics.
//   Lorentzian   MTR over all offsets (omega1 ignored)
//   AnalyticalZ  Z over all offsets, one curve per omega1
//   MtrRex       sum of Rex/R1a, offsets must all be positive
std::vector<Var> model_curves(Tape& tape, Var params_row, models::ModelKind kind,
                              const std::vector<double>& offsets_ppm,
                              const std::vector<double>& omega1_radps,
                              std::size_t pool_count, const FieldContext& ctx);

} // namespace cestfit::neural
