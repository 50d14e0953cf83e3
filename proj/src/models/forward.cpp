#include "cestfit/models/forward.hpp"

#include <cmath>
#include <numbers>

#include "cestfit/errors.hpp"
#include "cestfit/units.hpp"

namespace cestfit::models {

double gamma_sq_over4(const PoolParams& pool, double omega1_radps) {
    const double r2k = pool.r2 + pool.k;
    return (r2k / pool.k) * omega1_radps * omega1_radps + r2k * r2k;
}

double r_ex_at(const PoolParams& pool, double d_omega_radps, double offset_radps,
               double omega1_radps) {
    const double w1sq = omega1_radps * omega1_radps;
    const double dwsq = offset_radps * offset_radps;
    const double gamma4 = gamma_sq_over4(pool, omega1_radps);
    const double det = offset_radps - d_omega_radps;
    const double lorentz = w1sq / (gamma4 + det * det);
    const double tail = pool.r2 +
                        pool.k * (d_omega_radps * d_omega_radps + pool.r2 * (pool.r2 + pool.k)) /
                            (w1sq + dwsq);
    return pool.f_over_r1a * lorentz * tail;
}

std::vector<double> r_ex(const PoolParams& pool, std::span<const double> offsets_radps,
                         double omega1_radps, const FieldContext& ctx) {
    pool.validate();
    const double d_omega = ppm_to_radps(pool.d_omega_ppm, ctx);
    std::vector<double> out(offsets_radps.size());
    for (std::size_t i = 0; i < offsets_radps.size(); ++i)
        out[i] = r_ex_at(pool, d_omega, offsets_radps[i], omega1_radps);
    return out;
}

std::vector<double> z_forward(const ZModelParams& p, std::span<const double> offsets_ppm,
                              double omega1_radps, const FieldContext& ctx) {
    p.validate();
    const double w1sq = omega1_radps * omega1_radps;
    std::vector<double> d_omegas(p.pools.size());
    for (std::size_t j = 0; j < p.pools.size(); ++j)
        d_omegas[j] = ppm_to_radps(p.pools[j].d_omega_ppm, ctx);
    std::vector<double> out(offsets_ppm.size());
    for (std::size_t i = 0; i < offsets_ppm.size(); ++i) {
        const double dw = ppm_to_radps(offsets_ppm[i], ctx);
        const double dwsq = dw * dw;
        double rex_sum = 0.0;
        for (std::size_t j = 0; j < p.pools.size(); ++j)
            rex_sum += r_ex_at(p.pools[j], d_omegas[j], dw, omega1_radps);
        out[i] = dwsq / (dwsq + p.r2a_over_r1a * w1sq + (w1sq + dwsq) * rex_sum);
    }
    return out;
}

std::vector<double> mtr_rex_forward(const ZModelParams& p, std::span<const double> offsets_ppm,
                                    double omega1_radps, const FieldContext& ctx) {
    p.validate();
    std::vector<double> d_omegas(p.pools.size());
    for (std::size_t j = 0; j < p.pools.size(); ++j)
        d_omegas[j] = ppm_to_radps(p.pools[j].d_omega_ppm, ctx);
    std::vector<double> out(offsets_ppm.size());
    for (std::size_t i = 0; i < offsets_ppm.size(); ++i) {
        if (offsets_ppm[i] <= 0.0)
            throw AsymmetricSupport("mtr_rex_forward requires strictly positive offsets, got " +
                                    std::to_string(offsets_ppm[i]));
        const double dw = ppm_to_radps(offsets_ppm[i], ctx);
        double rex_sum = 0.0;
        for (std::size_t j = 0; j < p.pools.size(); ++j)
            rex_sum += r_ex_at(p.pools[j], d_omegas[j], dw, omega1_radps);
        out[i] = rex_sum;
    }
    return out;
}

std::vector<double> lorentzian_forward(const LorentzianParams& p,
                                       std::span<const double> offsets_ppm,
                                       const FieldContext& ctx) {
    p.validate();
    std::vector<double> d_omegas(p.pools.size());
    for (std::size_t j = 0; j < p.pools.size(); ++j)
        d_omegas[j] = ppm_to_radps(p.pools[j].d_omega_ppm, ctx);
    std::vector<double> out(offsets_ppm.size());
    for (std::size_t i = 0; i < offsets_ppm.size(); ++i) {
        const double dw = ppm_to_radps(offsets_ppm[i], ctx);
        double sum = 0.0;
        for (std::size_t j = 0; j < p.pools.size(); ++j) {
            const double det = dw - d_omegas[j];
            sum += p.pools[j].amplitude * p.pools[j].gamma_sq_over4 /
                   (det * det + p.pools[j].gamma_sq_over4);
        }
        out[i] = sum;
    }
    return out;
}

double area_under_curve(const LorentzianParams& p, std::size_t pool_index) {
    if (pool_index >= p.pools.size())
        throw IndexOutOfRange("pool index " + std::to_string(pool_index) + " out of range for " +
                              std::to_string(p.pools.size()) + " pools");
    const LorentzianPool& pool = p.pools[pool_index];
    return pool.amplitude * std::numbers::pi * std::sqrt(pool.gamma_sq_over4);
}

} // namespace cestfit::models
