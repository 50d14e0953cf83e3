#pragma once

#include <span>
#include <vector>

#include "cestfit/field_context.hpp"
#include "cestfit/models/params.hpp"

namespace cestfit::models {

// Effective linewidth term of the exchange-dependent relaxation:
// Gamma^2/4 = ((r2 + k) / k) * omega1^2 + (r2 + k)^2, in (rad/s)^2.
double gamma_sq_over4(const PoolParams& pool, double omega1_radps);

// Scalar kernel: Rex/R1a for one pool at one offset, everything in rad/s.
// No invariant checks; callers own physical validity.
double r_ex_at(const PoolParams& pool, double d_omega_radps, double offset_radps,
               double omega1_radps);

// Exchange-dependent relaxation in units of R1a (dimensionless), evaluated
// elementwise over offsets given in rad/s.
std::vector<double> r_ex(const PoolParams& pool, std::span<const double> offsets_radps,
                         double omega1_radps, const FieldContext& ctx);

// Steady-state Z-spectrum in ratio form:
// Z = dw^2 / (dw^2 + (R2a/R1a) w1^2 + (w1^2 + dw^2) * sum_i Rex_i/R1a).
std::vector<double> z_forward(const ZModelParams& p, std::span<const double> offsets_ppm,
                              double omega1_radps, const FieldContext& ctx);

// Right-hand side of the MTR_Rex relation: sum_i Rex_i/R1a over strictly
// positive offsets. r2a_over_r1a is ignored (not identifiable here).
std::vector<double> mtr_rex_forward(const ZModelParams& p, std::span<const double> offsets_ppm,
                                    double omega1_radps, const FieldContext& ctx);

// Multi-pool Lorentzian MTR model, offsets converted to rad/s.
std::vector<double> lorentzian_forward(const LorentzianParams& p,
                                       std::span<const double> offsets_ppm,
                                       const FieldContext& ctx);

// Analytic area of one Lorentzian pool over offset in rad/s:
// a_i * pi * sqrt(Gamma_i^2/4).
double area_under_curve(const LorentzianParams& p, std::size_t pool_index);

} // namespace cestfit::models
