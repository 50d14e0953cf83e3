#include "cestfit/solvers/fit.hpp"

#include <stdexcept>

#include "cestfit/errors.hpp"
#include "cestfit/metrics.hpp"
#include "cestfit/units.hpp"

namespace cestfit::solvers {

Objective build_objective(models::ModelKind kind, const SpectrumSet& data,
                          std::size_t pool_count, const FieldContext& ctx) {
    Objective obj;
    obj.inputs.kind = kind;
    obj.inputs.pool_count = pool_count;
    obj.inputs.ctx = ctx;

    switch (kind) {
    case models::ModelKind::Lorentzian: {
        if (data.size() != 1)
            throw GridMismatch("Lorentzian fit expects exactly one spectrum, got " +
                               std::to_string(data.size()));
        const Spectrum& s = data.spectra().front();
        const MetricCurve curve = mtr(s);
        obj.inputs.curves.push_back({curve.offsets_ppm, b1_to_radps(s.b1_ut(), ctx)});
        obj.target = curve.values;
        break;
    }
    case models::ModelKind::AnalyticalZ: {
        for (const Spectrum& s : data.spectra()) {
            obj.inputs.curves.push_back({s.offsets_ppm(), b1_to_radps(s.b1_ut(), ctx)});
            obj.target.insert(obj.target.end(), s.z().begin(), s.z().end());
        }
        break;
    }
    case models::ModelKind::MtrRex: {
        for (const Spectrum& s : data.spectra()) {
            try {
                const MetricCurve curve = mtr_rex_lhs(s, ctx);
                obj.inputs.curves.push_back({curve.offsets_ppm, b1_to_radps(s.b1_ut(), ctx)});
                obj.target.insert(obj.target.end(), curve.values.begin(), curve.values.end());
            } catch (const AsymmetricSupport& e) {
                throw GridMismatch(std::string("MTR_Rex fit: ") + e.what());
            }
        }
        break;
    }
    }
    obj.validate();
    return obj;
}

namespace {

FitResult fit_objective(const Objective& obj, const models::ModelBounds& mb, SolverKind solver,
                        const SolverConfig& cfg, InitMode init_mode, std::uint64_t seed) {
    mb.validate();
    std::vector<double> init;
    if (init_mode == InitMode::CenterOfBounds) {
        init = center_init(mb.bounds);
    } else {
        Rng rng(seed);
        init = random_init(mb.bounds, rng);
    }
    FitResult result = run_solver(solver, obj, mb.bounds, init, cfg);
    if (!mb.bounds.contains(result.params))
        throw std::logic_error("solver returned parameters outside the bounds box");
    return result;
}

} // namespace

FitResult fit(models::ModelKind kind, const SpectrumSet& data, const models::ModelBounds& mb,
              SolverKind solver, const FieldContext& ctx, const SolverConfig& cfg,
              InitMode init_mode, std::uint64_t seed) {
    const Objective obj = build_objective(kind, data, mb.pool_names.size(), ctx);
    return fit_objective(obj, mb, solver, cfg, init_mode, seed);
}

FitResult fit(models::ModelKind kind, const std::vector<TargetCurve>& curves,
              const models::ModelBounds& mb, SolverKind solver, const FieldContext& ctx,
              const SolverConfig& cfg, InitMode init_mode, std::uint64_t seed) {
    Objective obj;
    obj.inputs.kind = kind;
    obj.inputs.pool_count = mb.pool_names.size();
    obj.inputs.ctx = ctx;
    for (const TargetCurve& tc : curves) {
        obj.inputs.curves.push_back({tc.curve.offsets_ppm, tc.omega1_radps});
        obj.target.insert(obj.target.end(), tc.curve.values.begin(), tc.curve.values.end());
    }
    obj.validate();
    return fit_objective(obj, mb, solver, cfg, init_mode, seed);
}

} // namespace cestfit::solvers
