#pragma once

// Solitary-wave profiles omega(eta, A) and their moment integrals.
//
// For eta >= 0 the profile is the inverse of
//     eta(omega) = int_omega^1 dz / (z sqrt(gap(z))),  gap(z) = 1 - g1(A z)/g1(A).
// The inverse-square-root singularity at z = 1 is removed by z = 1 - s^2;
// below z = 1/2 the integral is taken in w = log z, where the integrand tends
// to one and the profile is carried in log form (relative accuracy in the tail).

#include <algorithm>
#include <array>
#include <initializer_list>
#include <utility>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "kdvlab/error.hpp"
#include "kdvlab/nonlinearity.hpp"
#include "kdvlab/numerics.hpp"

namespace kdv {

struct ProfileGrid {
    double eta_max = 40.0;
    std::size_t n_points = 4097; // odd, so that eta = 0 is a node
};

class SolitonProfile {
public:
    SolitonProfile() = default;

    SolitonProfile(double amplitude, double speed, std::vector<double> eta, std::vector<double> omega,
                   std::vector<double> omega_prime)
        : amplitude_(amplitude), speed_(speed), beta_(std::sqrt(speed)), eta_(std::move(eta)),
          omega_(std::move(omega)), omega_prime_(std::move(omega_prime))
    {
        require(eta_.size() >= 17 && eta_.size() % 2 == 1, "profile grid needs an odd number (>= 17) of points");
        require(omega_.size() == eta_.size() && omega_prime_.size() == eta_.size(), "profile sample size mismatch");
        step_ = eta_[1] - eta_[0];
        eta_max_ = eta_.back();
        const std::size_t n = eta_.size();
        std::vector<double> xs, ys;
        for (std::size_t j = n / 2 + (n / 2) / 2; j < n; ++j) {
            xs.push_back(eta_[j]);
            ys.push_back(omega_[j]);
        }
        decay_rate_ = num::fitted_decay_rate(xs, ys);
        if (!(decay_rate_ > 0.0)) decay_rate_ = 1.0;
    }

    [[nodiscard]] double amplitude() const { return amplitude_; }
    [[nodiscard]] double speed() const { return speed_; }
    [[nodiscard]] double beta() const { return beta_; }
    [[nodiscard]] double eta_max() const { return eta_max_; }
    [[nodiscard]] double step() const { return step_; }
    [[nodiscard]] double decay_rate() const { return decay_rate_; }
    [[nodiscard]] double tail_level() const { return std::max(omega_.front(), omega_.back()); }
    [[nodiscard]] std::span<const double> eta() const { return eta_; }
    [[nodiscard]] std::span<const double> omega() const { return omega_; }
    [[nodiscard]] std::span<const double> omega_prime() const { return omega_prime_; }

    /// omega(eta) anywhere; exponential extrapolation past the grid ends.
    [[nodiscard]] double operator()(double x) const
    {
        const double ax = std::abs(x);
        if (ax >= eta_max_) return omega_.back() * std::exp(-decay_rate_ * (ax - eta_max_));
        return num::lagrange8(omega_, eta_.front(), step_, x);
    }

    /// d omega / d eta anywhere.
    [[nodiscard]] double derivative(double x) const
    {
        const double ax = std::abs(x);
        if (ax >= eta_max_) {
            const double tail = omega_.back() * std::exp(-decay_rate_ * (ax - eta_max_));
            return x > 0 ? -decay_rate_ * tail : decay_rate_ * tail;
        }
        return num::lagrange8(omega_prime_, eta_.front(), step_, x);
    }

private:
    double amplitude_ = 0.0;
    double speed_ = 0.0;
    double beta_ = 0.0;
    double eta_max_ = 0.0;
    double step_ = 0.0;
    double decay_rate_ = 1.0;
    std::vector<double> eta_;
    std::vector<double> omega_;
    std::vector<double> omega_prime_;
};

namespace detail {

inline std::vector<double> symmetric_grid(const ProfileGrid& grid)
{
    require(grid.eta_max > 0.0, "eta_max must be positive");
    require(grid.n_points >= 17 && grid.n_points % 2 == 1, "profile grid needs an odd number (>= 17) of points");
    return num::linspace(-grid.eta_max, grid.eta_max, grid.n_points);
}

// Adaptive Gauss-Kronrod; the Kronrod error estimate is pessimistic, so the
// requested tolerance is loose while the attained accuracy is near round-off.
template <class F>
double gk_integrate(F&& f, double a, double b)
{
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 10, 1e-10, &err);
    if (!std::isfinite(v) || err > 1e-8 * std::max(1.0, std::abs(v)))
        throw NumericalError("profile quadrature did not converge (error estimate " + std::to_string(err) + ")");
    return v;
}

// Fixed 20-point Gauss-Legendre on a short interval of a smooth integrand.
template <class F>
double gauss_step(F&& f, double a, double b)
{
    const double v = boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
    if (!std::isfinite(v)) throw NumericalError("profile quadrature produced a non-finite value");
    return v;
}

} // namespace detail

/// Closed-form profile of g'(u) = u^kappa: omega = cosh((kappa-1) eta/2)^{-2/(kappa-1)}.
inline SolitonProfile power_law_profile(double kappa, const ProfileGrid& grid = {}, double amplitude = 1.0)
{
    require(kappa > 1.0, "power-law profile needs kappa > 1");
    require(amplitude > 0.0, "amplitude must be positive");
    auto eta = detail::symmetric_grid(grid);
    const double a = 0.5 * (kappa - 1.0);
    const double p = -2.0 / (kappa - 1.0);
    std::vector<double> w(eta.size()), dw(eta.size());
    for (std::size_t j = 0; j < eta.size(); ++j) {
        const double x = std::abs(a * eta[j]);
        // cosh(x)^p = (2 e^{-x} / (1 + e^{-2x}))^p, stable for large x
        const double lc = x + std::log1p(std::exp(-2.0 * x)) - std::log(2.0);
        w[j] = std::exp(p * lc);
        dw[j] = -std::tanh(a * eta[j]) * w[j];
    }
    const double speed = 2.0 * std::pow(amplitude, kappa - 1.0) / (kappa + 1.0);
    return SolitonProfile(amplitude, speed, std::move(eta), std::move(w), std::move(dw));
}

/// Numerical profile for an arbitrary admissible nonlinearity.
inline SolitonProfile solve_profile(const Nonlinearity& nl, double amplitude, const ProfileGrid& grid = {})
{
    require(amplitude > 0.0, "amplitude must be positive");
    auto eta = detail::symmetric_grid(grid);
    const std::size_t n = eta.size();
    const std::size_t mid = n / 2;
    const double A = amplitude;
    const double slope = nl.gap_slope(A);
    if (!(slope > 0.0)) throw NumericalError("profile: g1'(A) must be positive at the amplitude");

    // top branch, s in [0, s_split]: d eta / d s = 2 s / (z sqrt(gap))
    const double z_split = 0.5;
    const double s_split = std::sqrt(1.0 - z_split);
    auto deta_ds = [&](double s) {
        if (s < 1e-8) return 2.0 / std::sqrt(slope);
        const double s2 = s * s;
        const double gap = nl.ratio_gap(A, std::log1p(-s2));
        return 2.0 / ((1.0 - s2) * std::sqrt(gap / s2));
    };
    // bottom branch, w = log z <= log z_split: d eta / d w = -1/sqrt(gap)
    auto rsqrt_gap_w = [&](double w) { return 1.0 / std::sqrt(nl.ratio_gap(A, w)); };

    const double eta_split = detail::gk_integrate(deta_ds, 0.0, s_split);
    const double w_split = std::log(z_split);

    std::vector<double> omega(n), domega(n);
    omega[mid] = 1.0;
    domega[mid] = 0.0;

    double s_prev = 0.0, eta_prev = 0.0; // last converged point on the top branch
    double w_prev = w_split, eta_w_prev = eta_split;

    for (std::size_t j = mid + 1; j < n; ++j) {
        const double target = eta[j];
        double om = 0.0, log_om = 0.0;
        if (target <= eta_split) {
            // Newton in s on eta_prev + int_{s_prev}^{s} deta_ds = target
            double s = s_prev + (target - eta_prev) / deta_ds(s_prev);
            s = std::clamp(s, s_prev, s_split);
            for (int it = 0; it < 50; ++it) {
                const double val = eta_prev + detail::gauss_step(deta_ds, s_prev, s);
                const double ds = (val - target) / deta_ds(s);
                s -= ds;
                s = std::clamp(s, s_prev, s_split);
                if (std::abs(val - target) <= 4e-16 * std::max(1.0, target) || std::abs(ds) < 1e-16) break;
                if (it == 49) throw NumericalError("profile: Newton iteration near omega = 1 did not converge");
            }
            eta_prev = target;
            s_prev = s;
            log_om = std::log1p(-s * s);
            om = 1.0 - s * s;
        } else {
            // Newton in w on eta_w_prev + int_{w}^{w_prev} rsqrt_gap = target
            double w = w_prev - (target - eta_w_prev) / rsqrt_gap_w(w_prev);
            for (int it = 0; it < 50; ++it) {
                const double val = eta_w_prev + detail::gauss_step(rsqrt_gap_w, w, w_prev);
                const double dw = (val - target) / rsqrt_gap_w(w);
                w += dw;
                if (std::abs(val - target) <= 4e-16 * std::max(1.0, target) || std::abs(dw) < 1e-15) break;
                if (it == 49) throw NumericalError("profile: Newton iteration in the tail did not converge");
            }
            eta_w_prev = target;
            w_prev = w;
            log_om = w;
            om = std::exp(w);
        }
        omega[j] = om;
        domega[j] = -om * std::sqrt(nl.ratio_gap(A, log_om));
        omega[n - 1 - j] = om;
        domega[n - 1 - j] = -domega[j];
    }

    if (omega.back() >= 1e-12)
        throw NumericalError("profile: eta_max too small, omega(eta_max) = " + std::to_string(omega.back()));
    return SolitonProfile(A, 2.0 * nl.g1(A), std::move(eta), std::move(omega), std::move(domega));
}

/// Moment integrals of a profile: a_k = int omega^k, a2' = int omega'^2 and the
/// normalised functional moments a_F = F(A)^{-1} int F(A omega) for F in {g, g', g2}.
struct MomentSet {
    double a1 = 0.0;
    double a2 = 0.0;
    double a3 = 0.0;
    double a2_prime = 0.0;
    double a_g = 0.0;
    double a_gprime = 0.0;
    double a_g2 = 0.0;
};

/// int F(omega, omega') d eta over the profile grid.
template <class F>
double profile_integral(const SolitonProfile& p, F&& f)
{
    const auto w = p.omega();
    const auto dw = p.omega_prime();
    std::vector<double> y(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) y[j] = f(w[j], dw[j]);
    return num::trapezoid(y, p.step());
}

inline MomentSet moments(const Nonlinearity& nl, const SolitonProfile& p)
{
    if (p.tail_level() >= 1e-12)
        throw NumericalError("moments: profile tail not decayed below 1e-12");
    const double A = p.amplitude();
    MomentSet m;
    m.a1 = profile_integral(p, [](double w, double) { return w; });
    m.a2 = profile_integral(p, [](double w, double) { return w * w; });
    m.a3 = profile_integral(p, [](double w, double) { return w * w * w; });
    m.a2_prime = profile_integral(p, [](double, double d) { return d * d; });
    m.a_g = profile_integral(p, [&](double w, double) { return nl.g(A * w); }) / nl.g(A);
    m.a_gprime = profile_integral(p, [&](double w, double) { return nl.g_prime(A * w); }) / nl.g_prime(A);
    m.a_g2 = profile_integral(p, [&](double w, double) { return nl.g2(A * w); }) / nl.g2(A);
    return m;
}

/// Residuals of the exact moment identities satisfied by every solitary wave,
/// each with the magnitude of its largest term for relative comparison.
struct IdentityResiduals {
    static constexpr std::size_t count = 5;
    // first_moment: a1 A V - a_g' g'(A)
    // square_flux: a2 V + 2 a_g2 g2(A)/A^2 + 3 a2' beta^2
    // square_balance: a2 V - 2 a_g g(A)/A^2 - a2' beta^2
    // potential_balance: a_g g(A) + a_g2 g2(A) + 2 a2' beta^2 A^2
    // gradient_balance: a2' - a2 + a_g
    std::array<double, count> residual{};
    std::array<double, count> scale{};
    static constexpr std::array<const char*, count> names{"first_moment",      "square_flux",
                                                          "square_balance",    "potential_balance",
                                                          "gradient_balance"};

    [[nodiscard]] double relative(std::size_t i) const { return std::abs(residual[i]) / scale[i]; }
    [[nodiscard]] double max_relative() const
    {
        double r = 0.0;
        for (std::size_t i = 0; i < count; ++i) r = std::max(r, relative(i));
        return r;
    }
};

inline IdentityResiduals identity_residuals(const Nonlinearity& nl, double A, const MomentSet& m)
{
    const auto sw = speed_and_width(nl, A);
    const double V = sw.speed, b2 = sw.beta * sw.beta;
    const double g = nl.g(A), gp = nl.g_prime(A), g2 = nl.g2(A), A2 = A * A;
    auto pack = [](std::initializer_list<double> terms) {
        double r = 0.0, s = 0.0;
        for (double t : terms) {
            r += t;
            s = std::max(s, std::abs(t));
        }
        return std::pair{r, s};
    };
    IdentityResiduals out;
    const std::array<std::pair<double, double>, 5> rs{
        pack({m.a1 * A * V, -m.a_gprime * gp}),
        pack({m.a2 * V, 2.0 * m.a_g2 * g2 / A2, 3.0 * m.a2_prime * b2}),
        pack({m.a2 * V, -2.0 * m.a_g * g / A2, -m.a2_prime * b2}),
        pack({m.a_g * g, m.a_g2 * g2, 2.0 * m.a2_prime * b2 * A2}),
        pack({m.a2_prime, -m.a2, m.a_g}),
    };
    for (std::size_t i = 0; i < 5; ++i) {
        out.residual[i] = rs[i].first;
        out.scale[i] = rs[i].second;
    }
    return out;
}

} // namespace kdv
