#pragma once

#include "cestfit/errors.hpp"

namespace cestfit {

// Default gyromagnetic ratio of 1H divided by 2*pi, in Hz/T.
inline constexpr double kDefaultGammaBar = 42.577e6;

// Static-field context shared by all frequency conversions.
struct FieldContext {
    double b0_tesla = 9.4;
    double gamma_bar_hz_per_t = kDefaultGammaBar;

    FieldContext() = default;
    explicit FieldContext(double b0, double gamma_bar = kDefaultGammaBar)
        : b0_tesla(b0), gamma_bar_hz_per_t(gamma_bar) {
        validate();
    }

    void validate() const {
        if (!(b0_tesla > 0.0))
            throw ConfigError("FieldContext: b0 must be > 0");
        if (!(gamma_bar_hz_per_t > 0.0))
            throw ConfigError("FieldContext: gamma_bar must be > 0");
    }
};

} // namespace cestfit
