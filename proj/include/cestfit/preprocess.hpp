#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "cestfit/spectrum.hpp"

namespace cestfit {

// Raw acquisition: (offset ppm, signal intensity) pairs, offsets strictly
// increasing.
using RawSignal = std::vector<std::pair<double, double>>;

// Divide intensities by the measured signal at ref_offset_ppm. The reference
// must be an exact grid sample (within 1e-9 ppm) with positive intensity.
Spectrum normalize(const RawSignal& raw_signal, double ref_offset_ppm, double b1_ut);

struct B0Correction {
    Spectrum corrected;
    double shift_ppm = 0.0;
    // Grid samples whose re-interpolation fell outside the shifted support
    // and were clamped to the nearest interior spline value.
    std::vector<std::size_t> clamped_indices;
};

// Estimate the water frequency offset from the spline minimum of the
// Z-spectrum and re-center the spectrum on the original grid.
// search_window_ppm bounds the minimum search around the discrete argmin;
// resample_factor controls the dense-resampling density (samples per native
// grid interval inside the window).
B0Correction b0_correct(const Spectrum& s, double search_window_ppm = 1.0,
                        int resample_factor = 100);

} // namespace cestfit
