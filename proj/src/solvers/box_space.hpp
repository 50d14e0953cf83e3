#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "cestfit/errors.hpp"
#include "cestfit/models/bounds.hpp"
#include "cestfit/solvers/objective.hpp"

namespace cestfit::solvers::detail {

// Normalized solver coordinates: free parameter j maps to
// center[j] + deviation[j] * z with z in [-1, 1]; fixed parameters stay at
// center. Rescaling makes the box uniform so step sizes and tolerances are
// comparable across parameters of very different magnitudes.
class BoxSpace {
public:
    explicit BoxSpace(const models::ParamBounds& bounds)
        : bounds_(&bounds), free_(bounds.free_indices()), full_(bounds.center) {
        bounds.validate();
    }

    std::size_t dim() const { return free_.size(); }
    const std::vector<std::size_t>& free() const { return free_; }

    // z -> full parameter vector (scratch buffer, overwritten per call).
    const std::vector<double>& to_full(std::span<const double> z) const {
        for (std::size_t i = 0; i < free_.size(); ++i) {
            const std::size_t j = free_[i];
            full_[j] = bounds_->center[j] + bounds_->deviation[j] * z[i];
        }
        return full_;
    }

    std::vector<double> to_z(std::span<const double> full) const {
        if (full.size() != bounds_->size())
            throw LengthMismatch("BoxSpace::to_z: wrong parameter vector length");
        std::vector<double> z(free_.size());
        for (std::size_t i = 0; i < free_.size(); ++i) {
            const std::size_t j = free_[i];
            z[i] = std::clamp((full[j] - bounds_->center[j]) / bounds_->deviation[j], -1.0, 1.0);
        }
        return z;
    }

    // Gradient w.r.t. z from the full-layout gradient (chain rule).
    std::vector<double> grad_to_z(std::span<const double> grad_full) const {
        std::vector<double> g(free_.size());
        for (std::size_t i = 0; i < free_.size(); ++i)
            g[i] = grad_full[free_[i]] * bounds_->deviation[free_[i]];
        return g;
    }

    static void project(std::vector<double>& z) {
        for (double& v : z)
            v = std::clamp(v, -1.0, 1.0);
    }

private:
    const models::ParamBounds* bounds_;
    std::vector<std::size_t> free_;
    mutable std::vector<double> full_;
};

// Best-so-far tracker guaranteeing result objective <= init objective.
struct BestPoint {
    std::vector<double> z;
    double f = 0.0;

    void offer(std::span<const double> candidate, double value) {
        if (value < f) {
            z.assign(candidate.begin(), candidate.end());
            f = value;
        }
    }
};

} // namespace cestfit::solvers::detail
