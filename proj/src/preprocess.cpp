#include "cestfit/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cestfit/errors.hpp"
#include "cestfit/spline.hpp"

namespace cestfit {

Spectrum normalize(const RawSignal& raw_signal, double ref_offset_ppm, double b1_ut) {
    std::vector<double> offsets(raw_signal.size());
    std::vector<double> intensity(raw_signal.size());
    for (std::size_t i = 0; i < raw_signal.size(); ++i) {
        offsets[i] = raw_signal[i].first;
        intensity[i] = raw_signal[i].second;
    }

    std::size_t ref = raw_signal.size();
    for (std::size_t i = 0; i < offsets.size(); ++i) {
        if (std::abs(offsets[i] - ref_offset_ppm) < 1e-9) {
            ref = i;
            break;
        }
    }
    if (ref == raw_signal.size())
        throw MissingReference("normalize: reference offset not on the grid");
    if (!(intensity[ref] > 0.0))
        throw NonPositiveReference("normalize: reference intensity must be > 0");

    std::vector<double> z(intensity.size());
    const double s0 = intensity[ref];
    for (std::size_t i = 0; i < z.size(); ++i)
        z[i] = intensity[i] / s0;
    return Spectrum(std::move(offsets), std::move(z), b1_ut);
}

B0Correction b0_correct(const Spectrum& s, double search_window_ppm, int resample_factor) {
    const auto& x = s.offsets_ppm();
    const auto& z = s.z();
    const std::size_t n = x.size();

    const double span = x.back() - x.front();
    if (!(search_window_ppm > 0.0) || search_window_ppm > 0.5 * span)
        throw ConfigError("b0_correct: search window must be positive and at most half the grid span");

    const std::size_t argmin =
        static_cast<std::size_t>(std::min_element(z.begin(), z.end()) - z.begin());
    if (argmin == 0 || argmin == n - 1)
        throw EdgeMinimum("b0_correct: spectrum minimum lies on the grid edge");

    const CubicSpline spline(x, z);

    // Dense resampling of the spline around the discrete argmin.
    const double native_step = span / static_cast<double>(n - 1);
    const double step = native_step / static_cast<double>(resample_factor);
    const double lo = std::max(x.front(), x[argmin] - search_window_ppm);
    const double hi = std::min(x.back(), x[argmin] + search_window_ppm);
    double best_t = x[argmin];
    double best_v = z[argmin];
    const long count = std::lround(std::ceil((hi - lo) / step));
    for (long k = 0; k <= count; ++k) {
        const double t = std::min(lo + static_cast<double>(k) * step, hi);
        const double v = spline(t);
        if (v < best_v) {
            best_v = v;
            best_t = t;
        }
    }
    const double shift = best_t;

    // Re-grid through the same spline; boundary samples that would need
    // values outside the measured support are clamped and reported.
    std::vector<double> corrected(n);
    std::vector<std::size_t> clamped;
    for (std::size_t i = 0; i < n; ++i) {
        double t = x[i] + shift;
        if (t < x.front() || t > x.back()) {
            t = std::clamp(t, x.front(), x.back());
            clamped.push_back(i);
        }
        corrected[i] = spline(t);
    }

    return B0Correction{Spectrum(x, std::move(corrected), s.b1_ut()), shift, std::move(clamped)};
}

} // namespace cestfit
