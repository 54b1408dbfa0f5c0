#pragma once

// Small grid utilities shared by the modules: uniform grids, trapezoid and
// cumulative quadratures, finite-difference stencils, local Lagrange
// interpolation and least-squares line fits.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "kdvlab/error.hpp"

namespace kdv::num {

/// n equispaced points covering [a, b] inclusive.
inline std::vector<double> linspace(double a, double b, std::size_t n)
{
    require(n >= 2, "linspace: need at least two points");
    std::vector<double> x(n);
    const double h = (b - a) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) x[i] = a + h * static_cast<double>(i);
    x.back() = b;
    return x;
}

/// Composite trapezoid rule on a uniform grid. Spectrally accurate for
/// analytic integrands that decay (or vanish with all derivatives) at the ends.
inline double trapezoid(std::span<const double> y, double h)
{
    if (y.size() < 2) return 0.0;
    double s = 0.5 * (y.front() + y.back());
    for (std::size_t i = 1; i + 1 < y.size(); ++i) s += y[i];
    return s * h;
}

/// Running integral I_j = int_{x_0}^{x_j} y dx, fourth-order accurate.
inline std::vector<double> cumulative_integral(std::span<const double> y, double h)
{
    const std::size_t n = y.size();
    std::vector<double> out(n, 0.0);
    if (n < 2) return out;
    if (n < 4) {
        for (std::size_t j = 1; j < n; ++j) out[j] = out[j - 1] + 0.5 * h * (y[j - 1] + y[j]);
        return out;
    }
    for (std::size_t j = 0; j + 1 < n; ++j) {
        double seg;
        if (j == 0) {
            seg = h / 24.0 * (9.0 * y[0] + 19.0 * y[1] - 5.0 * y[2] + y[3]);
        } else if (j + 2 == n) {
            seg = h / 24.0 * (9.0 * y[n - 1] + 19.0 * y[n - 2] - 5.0 * y[n - 3] + y[n - 4]);
        } else {
            seg = h / 24.0 * (-y[j - 1] + 13.0 * y[j] + 13.0 * y[j + 1] - y[j + 2]);
        }
        out[j + 1] = out[j] + seg;
    }
    return out;
}

/// Fourth-order first derivative on a uniform grid (one-sided at the edges).
inline std::vector<double> derivative4(std::span<const double> y, double h)
{
    const std::size_t n = y.size();
    require(n >= 5, "derivative4: need at least five samples");
    std::vector<double> d(n);
    const double c = 1.0 / (12.0 * h);
    d[0] = c * (-25.0 * y[0] + 48.0 * y[1] - 36.0 * y[2] + 16.0 * y[3] - 3.0 * y[4]);
    d[1] = c * (-3.0 * y[0] - 10.0 * y[1] + 18.0 * y[2] - 6.0 * y[3] + y[4]);
    for (std::size_t j = 2; j + 2 < n; ++j)
        d[j] = c * (-y[j + 2] + 8.0 * y[j + 1] - 8.0 * y[j - 1] + y[j - 2]);
    d[n - 2] = -c * (-3.0 * y[n - 1] - 10.0 * y[n - 2] + 18.0 * y[n - 3] - 6.0 * y[n - 4] + y[n - 5]);
    d[n - 1] = -c * (-25.0 * y[n - 1] + 48.0 * y[n - 2] - 36.0 * y[n - 3] + 16.0 * y[n - 4] - 3.0 * y[n - 5]);
    return d;
}

/// Five-point central derivative of a callable.
template <class F>
double central_derivative(F&& f, double x, double h)
{
    return (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h);
}

/// Eight-point Lagrange interpolation on a uniform grid x_i = x0 + i*h.
/// Caller guarantees x lies inside [x0, x0 + (n-1)h].
inline double lagrange8(std::span<const double> y, double x0, double h, double x)
{
    constexpr int m = 8;
    const int n = static_cast<int>(y.size());
    const double s = (x - x0) / h;
    int i0 = static_cast<int>(std::floor(s)) - 3;
    i0 = std::clamp(i0, 0, n - m);
    const double t = s - i0;
    // exact hit on a node
    for (int k = 0; k < m; ++k)
        if (t == static_cast<double>(k)) return y[static_cast<std::size_t>(i0 + k)];
    // barycentric weights for equispaced nodes: (-1)^k C(m-1, k)
    static constexpr std::array<double, m> w{1, -7, 21, -35, 35, -21, 7, -1};
    double num = 0.0, den = 0.0;
    for (int k = 0; k < m; ++k) {
        const double c = w[static_cast<std::size_t>(k)] / (t - k);
        num += c * y[static_cast<std::size_t>(i0 + k)];
        den += c;
    }
    return num / den;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Ordinary least-squares fit y ~ slope*x + intercept.
inline LineFit fit_line(std::span<const double> x, std::span<const double> y)
{
    require(x.size() == y.size() && x.size() >= 2, "fit_line: need matching samples (n >= 2)");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    require(sxx > 0.0, "fit_line: degenerate abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    return f;
}

/// Order p of y ~ C x^p by least squares in log-log coordinates.
inline double fitted_order(std::span<const double> x, std::span<const double> y)
{
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    return fit_line(lx, ly).slope;
}

/// Decay rate r of |y| ~ C exp(-r |x|) fitted on the samples with |y| > floor.
/// Returns 0 when fewer than three usable samples exist.
inline double fitted_decay_rate(std::span<const double> x, std::span<const double> y, double floor = 1e-300)
{
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::abs(y[i]) > floor) {
            lx.push_back(std::abs(x[i]));
            ly.push_back(std::log(std::abs(y[i])));
        }
    }
    if (lx.size() < 3) return 0.0;
    return -fit_line(lx, ly).slope;
}

} // namespace kdv::num
