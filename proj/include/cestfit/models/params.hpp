#pragma once

#include <span>
#include <string>
#include <vector>

#include "cestfit/errors.hpp"

namespace cestfit::models {

// One exchanging solute pool. Only the ratio f/R1a is identifiable in
// steady state, so the pool size is stored that way (units: seconds).
struct PoolParams {
    double f_over_r1a = 0.0;  // s
    double k = 1.0;           // exchange rate, 1/s
    double r2 = 0.0;          // transversal relaxation rate, 1/s
    double d_omega_ppm = 0.0; // resonance offset of the pool

    void validate() const {
        if (!(f_over_r1a >= 0.0))
            throw ConfigError("PoolParams: f_over_r1a must be >= 0");
        if (!(k > 0.0))
            throw ConfigError("PoolParams: k must be > 0");
        if (!(r2 >= 0.0))
            throw ConfigError("PoolParams: r2 must be >= 0");
    }
};

// Parameters of the steady-state Z model and of the MTR_Rex model.
struct ZModelParams {
    double r2a_over_r1a = 0.0; // water relaxation ratio, dimensionless
    std::vector<PoolParams> pools;

    void validate() const {
        if (!(r2a_over_r1a >= 0.0))
            throw ConfigError("ZModelParams: r2a_over_r1a must be >= 0");
        if (pools.empty())
            throw ConfigError("ZModelParams: need at least one pool");
        for (const auto& p : pools)
            p.validate();
        for (std::size_t i = 0; i < pools.size(); ++i)
            for (std::size_t j = i + 1; j < pools.size(); ++j)
                if (pools[i].d_omega_ppm == pools[j].d_omega_ppm)
                    throw ConfigError("ZModelParams: pool offsets must be pairwise distinct");
    }

    bool operator==(const ZModelParams&) const = default;
};

struct LorentzianPool {
    double amplitude = 0.0;      // dimensionless, in [0, 1]
    double gamma_sq_over4 = 1.0; // Gamma^2/4, (rad/s)^2
    double d_omega_ppm = 0.0;
};

struct LorentzianParams {
    std::vector<LorentzianPool> pools;

    void validate() const {
        if (pools.empty())
            throw ConfigError("LorentzianParams: need at least one pool");
        for (const auto& p : pools) {
            if (!(p.amplitude >= 0.0 && p.amplitude <= 1.0))
                throw ConfigError("LorentzianParams: amplitude must be in [0, 1]");
            if (!(p.gamma_sq_over4 > 0.0))
                throw ConfigError("LorentzianParams: gamma_sq_over4 must be > 0");
        }
    }

    bool operator==(const LorentzianParams&) const = default;
};

enum class ModelKind { Lorentzian, AnalyticalZ, MtrRex };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

// Flattened parameter vector layouts.
//   Lorentzian:   per pool [amplitude, gamma_sq_over4, d_omega_ppm]
//   AnalyticalZ:  [r2a_over_r1a], then per pool [f_over_r1a, k, r2, d_omega_ppm]
//   MtrRex:       same layout as AnalyticalZ (r2a_over_r1a is carried but
//                 ignored by the model)
std::vector<double> flatten(const ZModelParams& p);
std::vector<double> flatten(const LorentzianParams& p);
ZModelParams unflatten_z(std::span<const double> v);
LorentzianParams unflatten_lorentzian(std::span<const double> v);

std::size_t layout_size(ModelKind kind, std::size_t pool_count);
std::vector<std::string> layout_names(ModelKind kind, const std::vector<std::string>& pool_names);

} // namespace cestfit::models
