#pragma once

#include <stdexcept>
#include <string>

namespace cestfit {

// Base class for all cestfit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define CESTFIT_ERROR(Name)                                           \
    class Name : public Error {                                       \
    public:                                                           \
        explicit Name(const std::string& what) : Error(what) {}       \
    }

// Preprocessing
CESTFIT_ERROR(MissingReference);
CESTFIT_ERROR(NonPositiveReference);
CESTFIT_ERROR(EdgeMinimum);
CESTFIT_ERROR(AsymmetricSupport);
CESTFIT_ERROR(ZeroSignal);
CESTFIT_ERROR(NonPositiveAmplitude);

// Models / bounds
CESTFIT_ERROR(IndexOutOfRange);
CESTFIT_ERROR(LengthMismatch);

// Fitting
CESTFIT_ERROR(GridMismatch);

// Network
CESTFIT_ERROR(ShapeMismatch);
CESTFIT_ERROR(InsufficientData);

// Synthesis
CESTFIT_ERROR(ShiftTooLarge);

// Evaluation
CESTFIT_ERROR(DegenerateDesign);
CESTFIT_ERROR(DegenerateTarget);

// Configuration / I/O
CESTFIT_ERROR(ConfigError);
CESTFIT_ERROR(IoError);

#undef CESTFIT_ERROR

} // namespace cestfit
