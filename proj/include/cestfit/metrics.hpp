#pragma once

#include "cestfit/field_context.hpp"
#include "cestfit/spectrum.hpp"

namespace cestfit {

// MTR(dw) = 1 - Z(dw), over the full grid.
MetricCurve mtr(const Spectrum& s);

// MTR_asym(dw) = Z(-dw) - Z(dw) for dw > 0. The mirrored value is read
// exactly on symmetric grids and spline-interpolated otherwise.
MetricCurve mtr_asym(const Spectrum& s);

// MTR_Rex(dw) = 1/Z(dw) - 1/Z(-dw) for dw > 0.
MetricCurve mtr_rex(const Spectrum& s);

// Left-hand side of the MTR_Rex model relation:
// MTR_Rex(dw) * dw^2 / (dw^2 + omega1^2), with dw and omega1 in rad/s.
MetricCurve mtr_rex_lhs(const Spectrum& s, const FieldContext& ctx);

} // namespace cestfit
