#pragma once

#include <cmath>
#include <numbers>

#include "cestfit/errors.hpp"
#include "cestfit/field_context.hpp"

namespace cestfit {

// Frequency offset in ppm -> angular frequency in rad/s at the given field.
// Linear and sign-preserving.
inline double ppm_to_radps(double offset_ppm, const FieldContext& ctx) {
    return 2.0 * std::numbers::pi * ctx.gamma_bar_hz_per_t * ctx.b0_tesla * offset_ppm * 1e-6;
}

inline double radps_to_ppm(double offset_radps, const FieldContext& ctx) {
    return offset_radps / (2.0 * std::numbers::pi * ctx.gamma_bar_hz_per_t * ctx.b0_tesla * 1e-6);
}

// rad/s per ppm conversion factor.
inline double radps_per_ppm(const FieldContext& ctx) {
    return 2.0 * std::numbers::pi * ctx.gamma_bar_hz_per_t * ctx.b0_tesla * 1e-6;
}

// Saturation amplitude B1 in microtesla -> omega1 = gamma * B1 in rad/s.
inline double b1_to_radps(double b1_microtesla, const FieldContext& ctx) {
    if (!(b1_microtesla > 0.0))
        throw NonPositiveAmplitude("b1_to_radps: b1 must be > 0");
    return 2.0 * std::numbers::pi * ctx.gamma_bar_hz_per_t * b1_microtesla * 1e-6;
}

// Lorentzian width: Gamma^2 in ppm^2 <-> Gamma^2/4 in (rad/s)^2. Config files
// carry widths in ppm^2; the model parameter is the quarter-square in rad/s.
inline double gamma_sq_ppm2_to_over4_radps(double gamma_sq_ppm2, const FieldContext& ctx) {
    const double c = radps_per_ppm(ctx);
    return gamma_sq_ppm2 * c * c / 4.0;
}

inline double gamma_sq_over4_radps_to_ppm2(double gamma_sq_over4, const FieldContext& ctx) {
    const double c = radps_per_ppm(ctx);
    return gamma_sq_over4 * 4.0 / (c * c);
}

} // namespace cestfit
