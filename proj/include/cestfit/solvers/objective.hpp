#pragma once

#include <span>
#include <vector>

#include "cestfit/models/jacobian.hpp"

namespace cestfit::solvers {

// Sum of squared residuals between stacked model outputs and target data,
// over all curves and offsets. function_evals counts model evaluations,
// including those spent on finite-difference gradients.
struct Objective {
    models::ModelInputs inputs;
    std::vector<double> target;
    mutable long function_evals = 0;

    void validate() const;

    double value(std::span<const double> params) const;

    struct ValueGrad {
        double value = 0.0;
        std::vector<double> grad;
        models::GradientMode mode = models::GradientMode::FiniteDifference;
    };
    ValueGrad value_and_gradient(std::span<const double> params) const;
};

} // namespace cestfit::solvers
