#pragma once

#include <span>
#include <vector>

namespace cestfit {

// Natural cubic spline through (x, y) with zero second derivative at both
// ends. x must be strictly increasing with at least 3 knots.
class CubicSpline {
public:
    CubicSpline(std::span<const double> x, std::span<const double> y);

    // Evaluate at t. Outside the knot range the boundary cubic is extended.
    double operator()(double t) const;

    double x_front() const { return x_.front(); }
    double x_back() const { return x_.back(); }

private:
    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> m_; // second derivatives at knots

    std::size_t interval(double t) const;
};

} // namespace cestfit
