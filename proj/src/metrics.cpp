#include "cestfit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "cestfit/errors.hpp"
#include "cestfit/spline.hpp"
#include "cestfit/units.hpp"

namespace cestfit {

namespace {

constexpr double kGridHitTolPpm = 1e-9;
constexpr double kZeroSignalTol = 1e-9;

// Z values at positive offsets paired with the mirrored Z(-dw) values.
struct MirroredView {
    std::vector<double> offsets_ppm; // strictly positive
    std::vector<double> z_pos;
    std::vector<double> z_neg;
};

MirroredView mirror(const Spectrum& s) {
    const auto& x = s.offsets_ppm();
    const auto& z = s.z();

    std::optional<CubicSpline> spline;
    MirroredView view;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0))
            continue;
        const double target = -x[i];
        if (target < x.front() - kGridHitTolPpm || target > x.back() + kGridHitTolPpm)
            throw AsymmetricSupport("metric: -dw outside the sampled offset range");

        // Exact grid hit wins over interpolation.
        double zn = 0.0;
        bool hit = false;
        const auto it = std::lower_bound(x.begin(), x.end(), target - kGridHitTolPpm);
        if (it != x.end() && std::abs(*it - target) < kGridHitTolPpm) {
            zn = z[static_cast<std::size_t>(it - x.begin())];
            hit = true;
        }
        if (!hit) {
            if (!spline)
                spline.emplace(x, z);
            zn = (*spline)(std::clamp(target, x.front(), x.back()));
        }
        view.offsets_ppm.push_back(x[i]);
        view.z_pos.push_back(z[i]);
        view.z_neg.push_back(zn);
    }
    return view;
}

} // namespace

MetricCurve mtr(const Spectrum& s) {
    MetricCurve curve;
    curve.kind = MetricKind::Mtr;
    curve.offsets_ppm = s.offsets_ppm();
    curve.values.reserve(s.size());
    for (double z : s.z())
        curve.values.push_back(1.0 - z);
    return curve;
}

MetricCurve mtr_asym(const Spectrum& s) {
    MirroredView view = mirror(s);
    MetricCurve curve;
    curve.kind = MetricKind::MtrAsym;
    curve.offsets_ppm = std::move(view.offsets_ppm);
    curve.values.resize(curve.offsets_ppm.size());
    for (std::size_t i = 0; i < curve.values.size(); ++i)
        curve.values[i] = view.z_neg[i] - view.z_pos[i];
    return curve;
}

MetricCurve mtr_rex(const Spectrum& s) {
    MirroredView view = mirror(s);
    MetricCurve curve;
    curve.kind = MetricKind::MtrRex;
    curve.offsets_ppm = std::move(view.offsets_ppm);
    curve.values.resize(curve.offsets_ppm.size());
    for (std::size_t i = 0; i < curve.values.size(); ++i) {
        if (view.z_pos[i] <= kZeroSignalTol || view.z_neg[i] <= kZeroSignalTol)
            throw ZeroSignal("mtr_rex: Z value at or below the zero-signal threshold");
        curve.values[i] = 1.0 / view.z_pos[i] - 1.0 / view.z_neg[i];
    }
    return curve;
}

MetricCurve mtr_rex_lhs(const Spectrum& s, const FieldContext& ctx) {
    MetricCurve curve = mtr_rex(s);
    curve.kind = MetricKind::MtrRexLhs;
    const double omega1 = b1_to_radps(s.b1_ut(), ctx);
    for (std::size_t i = 0; i < curve.values.size(); ++i) {
        const double dw = ppm_to_radps(curve.offsets_ppm[i], ctx);
        curve.values[i] *= dw * dw / (dw * dw + omega1 * omega1);
    }
    return curve;
}

} // namespace cestfit
