#include "cestfit/models/bounds.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "cestfit/errors.hpp"
#include "cestfit/units.hpp"

namespace cestfit::models {

std::vector<std::size_t> ParamBounds::free_indices() const {
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < deviation.size(); ++j)
        if (deviation[j] > 0.0)
            idx.push_back(j);
    return idx;
}

bool ParamBounds::contains(std::span<const double> x, double slack) const {
    if (x.size() != center.size())
        throw LengthMismatch("ParamBounds::contains: vector length " + std::to_string(x.size()) +
                             " != bounds length " + std::to_string(center.size()));
    for (std::size_t j = 0; j < x.size(); ++j)
        if (x[j] < lower(j) - slack || x[j] > upper(j) + slack)
            return false;
    return true;
}

std::vector<double> ParamBounds::clamp(std::span<const double> x) const {
    if (x.size() != center.size())
        throw LengthMismatch("ParamBounds::clamp: vector length " + std::to_string(x.size()) +
                             " != bounds length " + std::to_string(center.size()));
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j)
        out[j] = std::clamp(x[j], lower(j), upper(j));
    return out;
}

void ParamBounds::validate() const {
    if (center.size() != deviation.size() || center.size() != names.size())
        throw LengthMismatch("ParamBounds: center/deviation/names lengths differ");
    if (center.empty())
        throw ConfigError("ParamBounds: empty parameter layout");
    for (std::size_t j = 0; j < deviation.size(); ++j) {
        if (!(deviation[j] >= 0.0))
            throw ConfigError("ParamBounds: negative deviation for " + names[j]);
        if (!std::isfinite(center[j]) || !std::isfinite(deviation[j]))
            throw ConfigError("ParamBounds: non-finite bound for " + names[j]);
    }
}

void ModelBounds::validate() const {
    bounds.validate();
    if (pool_names.empty())
        throw ConfigError("ModelBounds: at least one pool required");
    std::set<std::string> unique(pool_names.begin(), pool_names.end());
    if (unique.size() != pool_names.size())
        throw ConfigError("ModelBounds: duplicate pool names");
    if (bounds.size() != layout_size(kind, pool_names.size()))
        throw ConfigError("ModelBounds: bounds length " + std::to_string(bounds.size()) +
                          " does not match layout for " + std::to_string(pool_names.size()) +
                          " pools of model " + to_string(kind));
}

namespace {

struct CenterDev {
    double center;
    double deviation;
};

CenterDev from_range(double lo, double hi) {
    if (!(hi >= lo))
        throw ConfigError("bounds: max < min");
    return {0.5 * (lo + hi), 0.5 * (hi - lo)};
}

} // namespace

ModelBounds lorentzian_bounds(const std::vector<PoolSite>& pools, double gamma_sq_ppm2_lo,
                              double gamma_sq_ppm2_hi, const FieldContext& ctx) {
    const CenterDev gamma = from_range(gamma_sq_ppm2_to_over4_radps(gamma_sq_ppm2_lo, ctx),
                                       gamma_sq_ppm2_to_over4_radps(gamma_sq_ppm2_hi, ctx));
    ModelBounds mb;
    mb.kind = ModelKind::Lorentzian;
    for (const PoolSite& pool : pools) {
        mb.pool_names.push_back(pool.name);
        mb.bounds.center.insert(mb.bounds.center.end(), {0.5, gamma.center, pool.d_omega_ppm});
        mb.bounds.deviation.insert(mb.bounds.deviation.end(), {0.5, gamma.deviation, 0.0});
    }
    std::vector<std::string> names;
    for (const PoolSite& pool : pools)
        names.push_back(pool.name);
    mb.bounds.names = layout_names(ModelKind::Lorentzian, names);
    mb.validate();
    return mb;
}

ModelBounds exchange_bounds(ModelKind kind, const std::vector<PoolSite>& pools,
                            const ExchangeRanges& ranges) {
    if (kind == ModelKind::Lorentzian)
        throw ConfigError("exchange_bounds: model must be z or mtrrex");
    const CenterDev f = from_range(ranges.f_over_r1a_lo, ranges.f_over_r1a_hi);
    const CenterDev k = from_range(ranges.k_lo, ranges.k_hi);
    const CenterDev r2 = from_range(ranges.r2_lo, ranges.r2_hi);
    const CenterDev r2a = from_range(ranges.r2a_over_r1a_lo, ranges.r2a_over_r1a_hi);
    ModelBounds mb;
    mb.kind = kind;
    mb.bounds.center.push_back(r2a.center);
    // The MTR_Rex model carries r2a_over_r1a in the layout but never reads
    // it, so the parameter is pinned.
    mb.bounds.deviation.push_back(kind == ModelKind::MtrRex ? 0.0 : r2a.deviation);
    std::vector<std::string> names;
    for (const PoolSite& pool : pools) {
        mb.pool_names.push_back(pool.name);
        names.push_back(pool.name);
        mb.bounds.center.insert(mb.bounds.center.end(),
                                {f.center, k.center, r2.center, pool.d_omega_ppm});
        mb.bounds.deviation.insert(mb.bounds.deviation.end(),
                                   {f.deviation, k.deviation, r2.deviation, 0.0});
    }
    mb.bounds.names = layout_names(kind, names);
    mb.validate();
    return mb;
}

namespace {

CenterDev parse_entry(const nlohmann::json& entry, const std::string& where) {
    if (entry.is_number())
        return {entry.get<double>(), 0.0};
    if (!entry.is_object())
        throw ConfigError("bounds entry for " + where + " must be a number or an object");
    if (entry.contains("fixed"))
        return {entry.at("fixed").get<double>(), 0.0};
    if (entry.contains("center") && entry.contains("deviation")) {
        CenterDev cd{entry.at("center").get<double>(), entry.at("deviation").get<double>()};
        if (!(cd.deviation >= 0.0))
            throw ConfigError("bounds entry for " + where + ": deviation must be >= 0");
        return cd;
    }
    if (entry.contains("min") && entry.contains("max"))
        return from_range(entry.at("min").get<double>(), entry.at("max").get<double>());
    throw ConfigError("bounds entry for " + where +
                      ": expected center/deviation, min/max, or fixed");
}

nlohmann::json entry_json(const CenterDev& cd) {
    return nlohmann::json{{"center", cd.center}, {"deviation", cd.deviation}};
}

} // namespace

ModelBounds model_bounds_from_json(const nlohmann::json& doc, const FieldContext& ctx) {
    if (!doc.is_object() || !doc.contains("model") || !doc.contains("pools"))
        throw ConfigError("bounds document requires 'model' and 'pools'");
    ModelBounds mb;
    mb.kind = model_kind_from_string(doc.at("model").get<std::string>());

    std::vector<CenterDev> entries;
    if (mb.kind != ModelKind::Lorentzian) {
        if (mb.kind == ModelKind::MtrRex) {
            // Layout slot exists but the model ignores it; pin unless given.
            entries.push_back(doc.contains("r2a_over_r1a")
                                  ? CenterDev{parse_entry(doc.at("r2a_over_r1a"),
                                                          "r2a_over_r1a").center, 0.0}
                                  : CenterDev{1.0, 0.0});
        } else {
            if (!doc.contains("r2a_over_r1a"))
                throw ConfigError("z-model bounds require 'r2a_over_r1a'");
            entries.push_back(parse_entry(doc.at("r2a_over_r1a"), "r2a_over_r1a"));
        }
    }

    for (const auto& pool : doc.at("pools")) {
        const std::string name = pool.at("name").get<std::string>();
        mb.pool_names.push_back(name);
        if (mb.kind == ModelKind::Lorentzian) {
            entries.push_back(parse_entry(pool.at("amplitude"), name + ".amplitude"));
            CenterDev gamma = parse_entry(pool.at("gamma_sq_ppm2"), name + ".gamma_sq_ppm2");
            gamma.center = gamma_sq_ppm2_to_over4_radps(gamma.center, ctx);
            gamma.deviation = gamma_sq_ppm2_to_over4_radps(gamma.deviation, ctx);
            entries.push_back(gamma);
            entries.push_back(parse_entry(pool.at("d_omega_ppm"), name + ".d_omega_ppm"));
        } else {
            entries.push_back(parse_entry(pool.at("f_over_r1a"), name + ".f_over_r1a"));
            entries.push_back(parse_entry(pool.at("k"), name + ".k"));
            entries.push_back(parse_entry(pool.at("r2"), name + ".r2"));
            entries.push_back(parse_entry(pool.at("d_omega_ppm"), name + ".d_omega_ppm"));
        }
    }

    for (const CenterDev& cd : entries) {
        mb.bounds.center.push_back(cd.center);
        mb.bounds.deviation.push_back(cd.deviation);
    }
    mb.bounds.names = layout_names(mb.kind, mb.pool_names);
    mb.validate();
    return mb;
}

nlohmann::json model_bounds_to_json(const ModelBounds& mb, const FieldContext& ctx) {
    mb.validate();
    nlohmann::json doc;
    doc["model"] = to_string(mb.kind);
    std::size_t j = 0;
    if (mb.kind != ModelKind::Lorentzian) {
        doc["r2a_over_r1a"] = entry_json({mb.bounds.center[j], mb.bounds.deviation[j]});
        ++j;
    }
    doc["pools"] = nlohmann::json::array();
    for (const std::string& name : mb.pool_names) {
        nlohmann::json pool{{"name", name}};
        if (mb.kind == ModelKind::Lorentzian) {
            pool["amplitude"] = entry_json({mb.bounds.center[j], mb.bounds.deviation[j]});
            ++j;
            pool["gamma_sq_ppm2"] =
                entry_json({gamma_sq_over4_radps_to_ppm2(mb.bounds.center[j], ctx),
                            gamma_sq_over4_radps_to_ppm2(mb.bounds.deviation[j], ctx)});
            ++j;
            pool["d_omega_ppm"] = entry_json({mb.bounds.center[j], mb.bounds.deviation[j]});
            ++j;
        } else {
            for (const char* key : {"f_over_r1a", "k", "r2", "d_omega_ppm"}) {
                pool[key] = entry_json({mb.bounds.center[j], mb.bounds.deviation[j]});
                ++j;
            }
        }
        doc["pools"].push_back(std::move(pool));
    }
    return doc;
}

ModelBounds load_model_bounds(const std::string& path, const FieldContext& ctx) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open bounds file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("bounds file " + path + ": " + e.what());
    }
    return model_bounds_from_json(doc, ctx);
}

void save_model_bounds(const ModelBounds& mb, const std::string& path, const FieldContext& ctx) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open bounds file for writing: " + path);
    out << model_bounds_to_json(mb, ctx).dump(2) << '\n';
}

} // namespace cestfit::models
