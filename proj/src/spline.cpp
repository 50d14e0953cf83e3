#include "cestfit/spline.hpp"

#include <algorithm>
#include <cstddef>

#include "cestfit/errors.hpp"

namespace cestfit {

CubicSpline::CubicSpline(std::span<const double> x, std::span<const double> y)
    : x_(x.begin(), x.end()), y_(y.begin(), y.end()) {
    const std::size_t n = x_.size();
    if (n != y_.size())
        throw LengthMismatch("CubicSpline: x and y length mismatch");
    if (n < 3)
        throw ConfigError("CubicSpline: need at least 3 knots");
    for (std::size_t i = 1; i < n; ++i) {
        if (!(x_[i] > x_[i - 1]))
            throw ConfigError("CubicSpline: x must be strictly increasing");
    }

    // Tridiagonal system for interior second derivatives, natural ends.
    m_.assign(n, 0.0);
    std::vector<double> diag(n, 0.0), rhs(n, 0.0), upper(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h0 = x_[i] - x_[i - 1];
        const double h1 = x_[i + 1] - x_[i];
        diag[i] = 2.0 * (h0 + h1);
        upper[i] = h1;
        rhs[i] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
    }
    // Thomas algorithm over i = 1 .. n-2; lower diagonal entry at row i is h0.
    for (std::size_t i = 2; i + 1 < n; ++i) {
        const double h0 = x_[i] - x_[i - 1];
        const double w = h0 / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
        m_[i] = (rhs[i] - upper[i] * m_[i + 1]) / diag[i];
        if (i == 1)
            break;
    }
}

std::size_t CubicSpline::interval(double t) const {
    // Index i such that the polynomial on [x_i, x_{i+1}] is used.
    const auto it = std::upper_bound(x_.begin(), x_.end(), t);
    std::size_t i = static_cast<std::size_t>(it - x_.begin());
    if (i == 0)
        return 0;
    if (i >= x_.size())
        return x_.size() - 2;
    return i - 1;
}

double CubicSpline::operator()(double t) const {
    const std::size_t i = interval(t);
    const double h = x_[i + 1] - x_[i];
    const double u = t - x_[i];
    const double b = (y_[i + 1] - y_[i]) / h - h * (2.0 * m_[i] + m_[i + 1]) / 6.0;
    const double c = m_[i] / 2.0;
    const double d = (m_[i + 1] - m_[i]) / (6.0 * h);
    return y_[i] + u * (b + u * (c + u * d));
}

} // namespace cestfit
