#include "cestfit/models/jacobian.hpp"

#include <cmath>

#include "cestfit/errors.hpp"
#include "cestfit/models/forward.hpp"
#include "cestfit/units.hpp"

namespace cestfit::models {

std::size_t ModelInputs::total_points() const {
    std::size_t n = 0;
    for (const CurveGrid& c : curves)
        n += c.offsets_ppm.size();
    return n;
}

void ModelInputs::validate() const {
    if (pool_count == 0)
        throw ConfigError("ModelInputs: pool_count must be >= 1");
    if (curves.empty())
        throw ConfigError("ModelInputs: at least one curve grid required");
    ctx.validate();
    for (const CurveGrid& c : curves) {
        if (c.offsets_ppm.empty())
            throw ConfigError("ModelInputs: empty offset grid");
        if (kind != ModelKind::Lorentzian && !(c.omega1_radps > 0.0))
            throw ConfigError("ModelInputs: omega1 must be > 0 for exchange models");
        if (kind == ModelKind::MtrRex)
            for (double o : c.offsets_ppm)
                if (!(o > 0.0))
                    throw AsymmetricSupport(
                        "ModelInputs: MTR_Rex grids must be strictly positive");
    }
}

namespace {

std::size_t expected_len(const ModelInputs& in) {
    return layout_size(in.kind, in.pool_count);
}

void check_len(const ModelInputs& in, std::span<const double> params) {
    if (params.size() != expected_len(in))
        throw LengthMismatch("model parameter vector length " + std::to_string(params.size()) +
                             " != layout length " + std::to_string(expected_len(in)));
}

// Pool view into the flattened exchange layout [r2a, (f, k, r2, dw) * P].
PoolParams exchange_pool(std::span<const double> params, std::size_t p) {
    return PoolParams{params[1 + 4 * p], params[2 + 4 * p], params[3 + 4 * p],
                      params[4 + 4 * p]};
}

} // namespace

std::vector<double> eval_model(const ModelInputs& in, std::span<const double> params) {
    check_len(in, params);
    std::vector<double> out;
    out.reserve(in.total_points());
    const double c = radps_per_ppm(in.ctx);

    for (const CurveGrid& curve : in.curves) {
        const double w1 = curve.omega1_radps;
        const double w1sq = w1 * w1;
        for (double offset_ppm : curve.offsets_ppm) {
            const double dw = offset_ppm * c;
            switch (in.kind) {
            case ModelKind::Lorentzian: {
                double sum = 0.0;
                for (std::size_t p = 0; p < in.pool_count; ++p) {
                    const double a = params[3 * p];
                    const double g4 = params[3 * p + 1];
                    const double det = dw - params[3 * p + 2] * c;
                    sum += a * g4 / (det * det + g4);
                }
                out.push_back(sum);
                break;
            }
            case ModelKind::AnalyticalZ: {
                double rex = 0.0;
                for (std::size_t p = 0; p < in.pool_count; ++p) {
                    const PoolParams pool = exchange_pool(params, p);
                    rex += r_ex_at(pool, pool.d_omega_ppm * c, dw, w1);
                }
                const double dwsq = dw * dw;
                out.push_back(dwsq / (dwsq + params[0] * w1sq + (w1sq + dwsq) * rex));
                break;
            }
            case ModelKind::MtrRex: {
                double rex = 0.0;
                for (std::size_t p = 0; p < in.pool_count; ++p) {
                    const PoolParams pool = exchange_pool(params, p);
                    rex += r_ex_at(pool, pool.d_omega_ppm * c, dw, w1);
                }
                out.push_back(rex);
                break;
            }
            }
        }
    }
    return out;
}

std::string to_string(GradientMode mode) {
    return mode == GradientMode::Analytic ? "analytic" : "finite-difference";
}

namespace {

JacobianResult lorentzian_jacobian(const ModelInputs& in, std::span<const double> params) {
    JacobianResult result;
    result.mode = GradientMode::Analytic;
    result.j.setZero(static_cast<Eigen::Index>(in.total_points()),
                     static_cast<Eigen::Index>(params.size()));
    const double c = radps_per_ppm(in.ctx);

    Eigen::Index row = 0;
    for (const CurveGrid& curve : in.curves) {
        for (double offset_ppm : curve.offsets_ppm) {
            const double dw = offset_ppm * c;
            for (std::size_t p = 0; p < in.pool_count; ++p) {
                const double a = params[3 * p];
                const double g4 = params[3 * p + 1];
                const double det = dw - params[3 * p + 2] * c;
                const double denom = det * det + g4;
                const double denom2 = denom * denom;
                result.j(row, static_cast<Eigen::Index>(3 * p)) = g4 / denom;
                result.j(row, static_cast<Eigen::Index>(3 * p + 1)) = a * det * det / denom2;
                result.j(row, static_cast<Eigen::Index>(3 * p + 2)) =
                    2.0 * a * g4 * det * c / denom2;
            }
            ++row;
        }
    }
    return result;
}

JacobianResult finite_difference_jacobian(const ModelInputs& in,
                                          std::span<const double> params) {
    JacobianResult result;
    result.mode = GradientMode::FiniteDifference;
    result.j.resize(static_cast<Eigen::Index>(in.total_points()),
                    static_cast<Eigen::Index>(params.size()));

    std::vector<double> x(params.begin(), params.end());
    for (std::size_t jcol = 0; jcol < x.size(); ++jcol) {
        const double h = 1e-6 * std::max(1.0, std::abs(x[jcol]));
        const double saved = x[jcol];
        x[jcol] = saved + h;
        const std::vector<double> hi = eval_model(in, x);
        x[jcol] = saved - h;
        const std::vector<double> lo = eval_model(in, x);
        x[jcol] = saved;
        const double inv = 1.0 / (2.0 * h);
        for (std::size_t r = 0; r < hi.size(); ++r)
            result.j(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(jcol)) =
                (hi[r] - lo[r]) * inv;
    }
    return result;
}

} // namespace

JacobianResult model_jacobian(const ModelInputs& in, std::span<const double> params) {
    check_len(in, params);
    if (in.kind == ModelKind::Lorentzian)
        return lorentzian_jacobian(in, params);
    return finite_difference_jacobian(in, params);
}

} // namespace cestfit::models
