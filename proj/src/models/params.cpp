#include "cestfit/models/params.hpp"

#include <span>

namespace cestfit::models {

std::string to_string(ModelKind kind) {
    switch (kind) {
    case ModelKind::Lorentzian: return "lorentzian";
    case ModelKind::AnalyticalZ: return "z";
    case ModelKind::MtrRex: return "mtrrex";
    }
    return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
    if (name == "lorentzian")
        return ModelKind::Lorentzian;
    if (name == "z")
        return ModelKind::AnalyticalZ;
    if (name == "mtrrex")
        return ModelKind::MtrRex;
    throw ConfigError("unknown model kind: " + name);
}

std::vector<double> flatten(const ZModelParams& p) {
    std::vector<double> v;
    v.reserve(1 + 4 * p.pools.size());
    v.push_back(p.r2a_over_r1a);
    for (const auto& pool : p.pools) {
        v.push_back(pool.f_over_r1a);
        v.push_back(pool.k);
        v.push_back(pool.r2);
        v.push_back(pool.d_omega_ppm);
    }
    return v;
}

std::vector<double> flatten(const LorentzianParams& p) {
    std::vector<double> v;
    v.reserve(3 * p.pools.size());
    for (const auto& pool : p.pools) {
        v.push_back(pool.amplitude);
        v.push_back(pool.gamma_sq_over4);
        v.push_back(pool.d_omega_ppm);
    }
    return v;
}

ZModelParams unflatten_z(std::span<const double> v) {
    if (v.size() < 5 || (v.size() - 1) % 4 != 0)
        throw LengthMismatch("unflatten_z: invalid vector length");
    ZModelParams p;
    p.r2a_over_r1a = v[0];
    const std::size_t pools = (v.size() - 1) / 4;
    p.pools.resize(pools);
    for (std::size_t i = 0; i < pools; ++i) {
        p.pools[i].f_over_r1a = v[1 + 4 * i];
        p.pools[i].k = v[2 + 4 * i];
        p.pools[i].r2 = v[3 + 4 * i];
        p.pools[i].d_omega_ppm = v[4 + 4 * i];
    }
    return p;
}

LorentzianParams unflatten_lorentzian(std::span<const double> v) {
    if (v.empty() || v.size() % 3 != 0)
        throw LengthMismatch("unflatten_lorentzian: invalid vector length");
    LorentzianParams p;
    const std::size_t pools = v.size() / 3;
    p.pools.resize(pools);
    for (std::size_t i = 0; i < pools; ++i) {
        p.pools[i].amplitude = v[3 * i];
        p.pools[i].gamma_sq_over4 = v[3 * i + 1];
        p.pools[i].d_omega_ppm = v[3 * i + 2];
    }
    return p;
}

std::size_t layout_size(ModelKind kind, std::size_t pool_count) {
    return kind == ModelKind::Lorentzian ? 3 * pool_count : 1 + 4 * pool_count;
}

std::vector<std::string> layout_names(ModelKind kind, const std::vector<std::string>& pool_names) {
    std::vector<std::string> names;
    if (kind == ModelKind::Lorentzian) {
        for (const auto& pool : pool_names) {
            names.push_back(pool + ".amplitude");
            names.push_back(pool + ".gamma_sq_over4");
            names.push_back(pool + ".d_omega_ppm");
        }
    } else {
        names.push_back("r2a_over_r1a");
        for (const auto& pool : pool_names) {
            names.push_back(pool + ".f_over_r1a");
            names.push_back(pool + ".k");
            names.push_back(pool + ".r2");
            names.push_back(pool + ".d_omega_ppm");
        }
    }
    return names;
}

} // namespace cestfit::models
