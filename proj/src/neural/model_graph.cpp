#include "cestfit/neural/model_graph.hpp"

#include "cestfit/errors.hpp"
#include "cestfit/units.hpp"

namespace cestfit::neural {

namespace {

Eigen::RowVectorXd to_row(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::RowVectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Sum of per-pool Rex/R1a rows for one curve of the exchange models.
Var rex_sum_row(Tape& t, Var p, std::size_t pool_count, double omega1, Var dw_row,
                Var inv_wsum_row, double radps, Eigen::Index n) {
    const double w1sq = omega1 * omega1;
    Var total;
    for (std::size_t i = 0; i < pool_count; ++i) {
        const Eigen::Index base = 1 + 4 * static_cast<Eigen::Index>(i);
        Var f = t.slice_cols(p, base, 1);
        Var k = t.slice_cols(p, base + 1, 1);
        Var r2 = t.slice_cols(p, base + 2, 1);
        Var d0 = t.scalar_mul(t.slice_cols(p, base + 3, 1), radps);

        Var rk = t.add(r2, k);
        Var g4 = t.add(t.scalar_mul(t.div(rk, k), w1sq), t.mul(rk, rk));
        Var det = t.sub(dw_row, t.broadcast_scalar(d0, 1, n));
        Var lorentz = t.div(t.broadcast_scalar(t.scalar_mul(f, w1sq), 1, n),
                            t.add(t.broadcast_scalar(g4, 1, n), t.mul(det, det)));
        Var inner = t.mul(k, t.add(t.mul(d0, d0), t.mul(r2, rk)));
        Var tail = t.add(t.broadcast_scalar(r2, 1, n),
                         t.mul(t.broadcast_scalar(inner, 1, n), inv_wsum_row));
        Var rex = t.mul(lorentz, tail);
        total = (i == 0) ? rex : t.add(total, rex);
    }
    return total;
}

} // namespace

std::vector<Var> model_curves(Tape& t, Var p, models::ModelKind kind,
                              const std::vector<double>& offsets_ppm,
                              const std::vector<double>& omega1_radps,
                              std::size_t pool_count, const FieldContext& ctx) {
    const Eigen::Index n = static_cast<Eigen::Index>(offsets_ppm.size());
    const Eigen::Index want =
        static_cast<Eigen::Index>(models::layout_size(kind, pool_count));
    if (pool_count < 1)
        throw ShapeMismatch("model_curves: need at least one pool");
    if (p.value().rows() != 1 || p.value().cols() != want)
        throw ShapeMismatch("model_curves: parameter row does not match layout");
    if (n < 1 || omega1_radps.empty())
        throw ShapeMismatch("model_curves: empty evaluation grid");

    const double radps = radps_per_ppm(ctx);
    Eigen::RowVectorXd dw = to_row(offsets_ppm) * radps;

    std::vector<Var> curves;
    curves.reserve(omega1_radps.size());

    if (kind == models::ModelKind::Lorentzian) {
        Var dw_row = t.constant(dw);
        Var total;
        for (std::size_t i = 0; i < pool_count; ++i) {
            const Eigen::Index base = 3 * static_cast<Eigen::Index>(i);
            Var a = t.slice_cols(p, base, 1);
            Var g4 = t.slice_cols(p, base + 1, 1);
            Var d0 = t.scalar_mul(t.slice_cols(p, base + 2, 1), radps);
            Var det = t.sub(dw_row, t.broadcast_scalar(d0, 1, n));
            Var pool = t.div(t.broadcast_scalar(t.mul(a, g4), 1, n),
                             t.add(t.broadcast_scalar(g4, 1, n), t.mul(det, det)));
            total = (i == 0) ? pool : t.add(total, pool);
        }
        // One curve per requested omega1; the model itself is B1-independent.
        for (std::size_t c = 0; c < omega1_radps.size(); ++c)
            curves.push_back(total);
        return curves;
    }

    Var r2a = t.slice_cols(p, 0, 1);
    for (double omega1 : omega1_radps) {
        const double w1sq = omega1 * omega1;
        Eigen::RowVectorXd dwsq = dw.array().square();
        Eigen::RowVectorXd inv_wsum = 1.0 / (dwsq.array() + w1sq);
        Var dw_row = t.constant(dw);
        Var inv_wsum_row = t.constant(inv_wsum);
        Var rex = rex_sum_row(t, p, pool_count, omega1, dw_row, inv_wsum_row, radps, n);
        if (kind == models::ModelKind::MtrRex) {
            curves.push_back(rex);
            continue;
        }
        Var dwsq_row = t.constant(dwsq);
        Var wsum_row = t.constant((dwsq.array() + w1sq).matrix());
        Var denom = t.add(t.add(dwsq_row, t.broadcast_scalar(t.scalar_mul(r2a, w1sq), 1, n)),
                          t.mul(wsum_row, rex));
        curves.push_back(t.div(dwsq_row, denom));
    }
    return curves;
}

} // namespace cestfit::neural
