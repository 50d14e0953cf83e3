#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cestfit/field_context.hpp"
#include "cestfit/models/params.hpp"

namespace cestfit::models {

// Box constraints in center/deviation form: parameter j lives in
// [center[j] - deviation[j], center[j] + deviation[j]]. deviation == 0 marks
// a fixed (not fitted) parameter. All values are in internal units and follow
// the flattened parameter layout of the model kind.
struct ParamBounds {
    std::vector<double> center;
    std::vector<double> deviation;
    std::vector<std::string> names;

    std::size_t size() const { return center.size(); }
    double lower(std::size_t j) const { return center[j] - deviation[j]; }
    double upper(std::size_t j) const { return center[j] + deviation[j]; }
    bool is_fixed(std::size_t j) const { return deviation[j] == 0.0; }

    // Indices of fitted (deviation > 0) parameters, in layout order.
    std::vector<std::size_t> free_indices() const;

    // True if x is inside the box elementwise, with absolute slack per side.
    bool contains(std::span<const double> x, double slack = 0.0) const;

    // Elementwise projection onto the box.
    std::vector<double> clamp(std::span<const double> x) const;

    // Throws LengthMismatch or ConfigError on inconsistent shape or d < 0.
    void validate() const;
};

// A model's parameter space: kind, pool naming, and the bounds box.
struct ModelBounds {
    ModelKind kind = ModelKind::Lorentzian;
    std::vector<std::string> pool_names;
    ParamBounds bounds;

    void validate() const;
};

// Pool identity for preset construction (position is known chemistry and is
// held fixed by all presets).
struct PoolSite {
    std::string name;
    double d_omega_ppm = 0.0;
};

// Lorentzian preset: amplitudes in [0, 1], width bounds given as Gamma^2 in
// ppm^2 (converted to gamma_sq_over4 in (rad/s)^2 internally), offsets fixed.
ModelBounds lorentzian_bounds(const std::vector<PoolSite>& pools, double gamma_sq_ppm2_lo,
                              double gamma_sq_ppm2_hi, const FieldContext& ctx);

// Exchange-model preset shared by the analytical Z and MTR_Rex layouts.
// Ranges are artifact defaults, overridable via config files.
struct ExchangeRanges {
    double f_over_r1a_lo = 0.0;
    double f_over_r1a_hi = 0.02;
    double k_lo = 100.0;
    double k_hi = 1500.0;
    double r2_lo = 1.0;
    double r2_hi = 150.0;
    double r2a_over_r1a_lo = 0.1;
    double r2a_over_r1a_hi = 10.0;
};

ModelBounds exchange_bounds(ModelKind kind, const std::vector<PoolSite>& pools,
                            const ExchangeRanges& ranges = {});

// JSON schema: {"model": ..., "pools": [{"name": ..., <param>: <entry>}, ...]}
// plus top-level "r2a_over_r1a" for the exchange models. An <entry> is one of
// {"center": c, "deviation": d}, {"min": lo, "max": hi}, {"fixed": v}, or a
// bare number (fixed). Lorentzian widths are keyed "gamma_sq_ppm2" and carry
// Gamma^2 in ppm^2; everything else is in internal units. Serialization is
// canonical center/deviation and load(save(x)) == x.
ModelBounds model_bounds_from_json(const nlohmann::json& doc, const FieldContext& ctx);
nlohmann::json model_bounds_to_json(const ModelBounds& mb, const FieldContext& ctx);

ModelBounds load_model_bounds(const std::string& path, const FieldContext& ctx);
void save_model_bounds(const ModelBounds& mb, const std::string& path, const FieldContext& ctx);

} // namespace cestfit::models
