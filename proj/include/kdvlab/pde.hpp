#pragma once

// Pseudo-spectral solver for u_t + (g'(u))_x + eps^2 u_xxx = F(x, t, u) on a periodic domain.
// The dispersive term is integrated exactly; the flux and the force by a fourth-order
// exponential Runge-Kutta scheme (ETDRK4, default) or by RK4 on the integrating-factor
// variable. Mass (the k = 0 mode) is untouched by the flux term.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "kdvlab/error.hpp"
#include "kdvlab/nonlinearity.hpp"
#include "kdvlab/profile.hpp"
#include "kdvlab/wave_field.hpp"

namespace kdv {

using ForceFn = std::function<double(double x, double t, double u)>;

enum class Scheme { etdrk4, if_rk4 };

struct SolverConfig {
    Scheme scheme = Scheme::etdrk4;
    double dt = 0.0;          // 0: largest step allowed by the stability bound
    double t_end = 0.0;
    bool dealias = true;      // zero the upper third of the modes in the nonlinear term
    bool clamp_negative = true;
    double courant = 0.3;     // dt <= courant * dx / max|g''(u)|
    double blowup_factor = 10.0;
    double tail_threshold = 1e-6;  // relative spectral content allowed near the cutoff
    std::vector<double> snapshot_times;  // t_end is always recorded
};

struct Trajectory {
    std::vector<WaveField> snapshots;
    std::vector<double> mass, momentum;
    double dt = 0.0;
    std::size_t steps = 0;
    double max_undershoot = 0.0;  // max over steps of -min(u) / max(u)
};

namespace detail {

class RealFft {
public:
    explicit RealFft(std::size_t n) : n_(n)
    {
        real_ = fftw_alloc_real(n);
        spec_ = fftw_alloc_complex(n / 2 + 1);
        // ESTIMATE keeps plans, and therefore round-off, identical between runs
        fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), real_, spec_, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec_, real_, FFTW_ESTIMATE);
        if (!fwd_ || !bwd_) throw NumericalError("fftw: plan creation failed");
    }
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;
    ~RealFft()
    {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(real_);
        fftw_free(spec_);
    }

    void forward(const std::vector<double>& in, std::vector<std::complex<double>>& out)
    {
        std::copy(in.begin(), in.end(), real_);
        fftw_execute(fwd_);
        out.resize(n_ / 2 + 1);
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = {spec_[k][0], spec_[k][1]};
    }

    /// Normalised inverse transform.
    void inverse(const std::vector<std::complex<double>>& in, std::vector<double>& out)
    {
        for (std::size_t k = 0; k < in.size(); ++k) {
            spec_[k][0] = in[k].real();
            spec_[k][1] = in[k].imag();
        }
        fftw_execute(bwd_);
        out.resize(n_);
        const double s = 1.0 / static_cast<double>(n_);
        for (std::size_t j = 0; j < n_; ++j) out[j] = real_[j] * s;
    }

private:
    std::size_t n_;
    double* real_ = nullptr;
    fftw_complex* spec_ = nullptr;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
};

/// Complex product without the IEEE NaN recovery path of operator*.
inline std::complex<double> mul(std::complex<double> a, std::complex<double> b)
{
    return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

inline bool power_of_two(std::size_t n) { return n >= 1 && (n & (n - 1)) == 0; }

} // namespace detail

inline double mass(const WaveField& w)
{
    double s = 0.0;
    for (double v : w.u) s += v;
    return s * w.dx();
}

inline double momentum(const WaveField& w)
{
    double s = 0.0;
    for (double v : w.u) s += v * v;
    return s * w.dx();
}

struct Invariants {
    double mass = 0.0;
    double momentum = 0.0;
};

inline Invariants invariants(const WaveField& w) { return {mass(w), momentum(w)}; }

/// Largest |u_hat_k| over the top tenth of the retained modes relative to max |u_hat_k|, k > 0.
inline double spectral_tail(const WaveField& w, bool dealias = true)
{
    detail::RealFft fft(w.size());
    std::vector<std::complex<double>> uh;
    fft.forward(w.u, uh);
    const std::size_t kmax = dealias ? (w.size() / 3) : (w.size() / 2);
    const std::size_t k0 = kmax - kmax / 10;
    double top = 0.0, peak = 0.0;
    for (std::size_t k = 1; k < kmax; ++k) {
        const double a = std::abs(uh[k]);
        peak = std::max(peak, a);
        if (k >= k0) top = std::max(top, a);
    }
    return peak > 0.0 ? top / peak : 0.0;
}

/// Largest stable step for the explicit part.
inline double stable_dt(const Nonlinearity& nl, const WaveField& w, double courant)
{
    double umax = 0.0;
    for (double v : w.u) umax = std::max(umax, std::abs(v));
    const double speed = nl.g_second(1.2 * umax);
    if (speed <= 0.0) return std::numeric_limits<double>::infinity();
    return courant * w.dx() / speed;
}

/// Periodic single-soliton field A omega(beta (x - c)/eps), summed over the neighbouring images.
inline WaveField soliton_field(const SolitonProfile& p, double center, double epsilon, double x0, double length,
                               std::size_t n)
{
    require(epsilon > 0.0 && length > 0.0 && n >= 2, "soliton_field: invalid grid");
    WaveField w{x0, length, epsilon, 0.0, std::vector<double>(n, 0.0)};
    for (std::size_t j = 0; j < n; ++j)
        for (int img = -1; img <= 1; ++img)
            w.u[j] += p.amplitude() * p(p.beta() * (w.x(j) - center + img * length) / epsilon);
    return w;
}

/// Evolves the field; snapshots at the requested times and at t_end.
inline Trajectory evolve(const WaveField& initial, const Nonlinearity& nl, const SolverConfig& cfg,
                         const ForceFn& force = nullptr)
{
    const std::size_t n = initial.size();
    require(n >= 256 && detail::power_of_two(n), "evolve: N must be a power of two >= 256");
    require(initial.epsilon > 0.0, "evolve: epsilon must be positive");
    require(initial.length > 0.0, "evolve: domain length must be positive");
    require(cfg.t_end >= initial.t, "evolve: t_end before the initial time");
    for (double v : initial.u)
        if (!std::isfinite(v)) throw ValidationError("evolve: initial field is not finite");

    const double tail0 = spectral_tail(initial, cfg.dealias);
    if (tail0 > 1e-8) throw ValidationError("evolve: initial field under-resolved, spectral tail " + std::to_string(tail0));

    const double dt_max = stable_dt(nl, initial, cfg.courant);
    if (cfg.dt > 0.0 && cfg.dt > dt_max)
        throw ValidationError("evolve: dt = " + std::to_string(cfg.dt) + " exceeds the stability bound " +
                              std::to_string(dt_max));
    const double dt_target = cfg.dt > 0.0 ? cfg.dt : dt_max;

    std::vector<double> stops;
    for (double t : cfg.snapshot_times)
        if (t > initial.t && t < cfg.t_end) stops.push_back(t);
    std::sort(stops.begin(), stops.end());
    stops.push_back(cfg.t_end);

    const double eps2 = initial.epsilon * initial.epsilon;
    const std::size_t nk = n / 2 + 1;
    const std::size_t k_cut = cfg.dealias ? n / 3 : n / 2;
    std::vector<double> k(nk);
    for (std::size_t m = 0; m < nk; ++m) k[m] = 2.0 * std::numbers::pi * static_cast<double>(m) / initial.length;

    double umax0 = 0.0;
    for (double v : initial.u) umax0 = std::max(umax0, std::abs(v));

    using detail::mul;
    detail::RealFft fft(n);
    std::vector<double> x(n), ureal(n), work(n);
    for (std::size_t j = 0; j < n; ++j) x[j] = initial.x(j);

    // nonlinear part: -i k F[g'(u)] + F[force]
    std::vector<std::complex<double>> flux_hat, force_hat;
    double undershoot = 0.0;
    auto nonlinear = [&](const std::vector<std::complex<double>>& vh, double t, std::vector<std::complex<double>>& out) {
        fft.inverse(vh, ureal);
        double hi = 0.0, lo = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            hi = std::max(hi, ureal[j]);
            lo = std::min(lo, ureal[j]);
            const double u = cfg.clamp_negative ? std::max(ureal[j], 0.0) : ureal[j];
            work[j] = nl.g_prime(u);
        }
        if (hi > 0.0) undershoot = std::max(undershoot, -lo / hi);
        fft.forward(work, flux_hat);
        out.assign(nk, std::complex<double>{});
        for (std::size_t m = 1; m < nk; ++m) {
            if (m >= k_cut || m == n / 2) continue;
            out[m] = {k[m] * flux_hat[m].imag(), -k[m] * flux_hat[m].real()};
        }
        if (force) {
            for (std::size_t j = 0; j < n; ++j) work[j] = force(x[j], t, ureal[j]);
            fft.forward(work, force_hat);
            for (std::size_t m = 0; m < nk; ++m)
                if (m < k_cut || !cfg.dealias) out[m] += force_hat[m];
        }
    };

    Trajectory traj;
    auto record = [&](const std::vector<std::complex<double>>& uh, double t) {
        WaveField w{initial.x0, initial.length, initial.epsilon, t, {}};
        fft.inverse(uh, w.u);
        traj.mass.push_back(mass(w));
        traj.momentum.push_back(momentum(w));
        traj.snapshots.push_back(std::move(w));
    };

    std::vector<std::complex<double>> uh, a, b, c, d, tmp(nk), vb(nk);
    fft.forward(initial.u, uh);
    record(uh, initial.t);

    double t = initial.t;
    // per-mode coefficients; phi functions by contour averaging (Kassam and Trefethen)
    std::vector<std::complex<double>> e_half(nk), e_full(nk), q(nk), f1(nk), f2(nk), f3(nk);
    auto set_coefficients = [&](double dt) {
        constexpr int contour = 64;
        for (std::size_t m = 0; m < nk; ++m) {
            const std::complex<double> lh(0.0, eps2 * k[m] * k[m] * k[m] * dt);
            e_half[m] = std::exp(0.5 * lh);
            e_full[m] = e_half[m] * e_half[m];
            if (cfg.scheme != Scheme::etdrk4) continue;
            std::complex<double> sq{}, s1{}, s2{}, s3{};
            for (int j = 0; j < contour; ++j) {
                const auto z = lh + std::polar(1.0, 2.0 * std::numbers::pi * (j + 0.5) / contour);
                const auto ez = std::exp(z), ez2 = std::exp(0.5 * z), z3 = z * z * z;
                sq += (ez2 - 1.0) / z;
                s1 += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
                s2 += (2.0 + z + ez * (z - 2.0)) / z3;
                s3 += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
            }
            q[m] = dt * sq / double(contour);
            f1[m] = dt * s1 / double(contour);
            f2[m] = dt * s2 / double(contour);
            f3[m] = dt * s3 / double(contour);
        }
    };
    auto step_etdrk4 = [&](double t, double dt) {
        nonlinear(uh, t, a);
        std::vector<std::complex<double>>& va = tmp;
        for (std::size_t m = 0; m < nk; ++m) va[m] = mul(e_half[m], uh[m]) + mul(q[m], a[m]);
        nonlinear(va, t + 0.5 * dt, b);
        for (std::size_t m = 0; m < nk; ++m) vb[m] = mul(e_half[m], uh[m]) + mul(q[m], b[m]);
        nonlinear(vb, t + 0.5 * dt, c);
        for (std::size_t m = 0; m < nk; ++m) vb[m] = mul(e_half[m], va[m]) + mul(q[m], 2.0 * c[m] - a[m]);
        nonlinear(vb, t + dt, d);
        for (std::size_t m = 0; m < nk; ++m)
            uh[m] = mul(e_full[m], uh[m]) + mul(f1[m], a[m]) + 2.0 * mul(f2[m], b[m] + c[m]) + mul(f3[m], d[m]);
    };
    auto step_if_rk4 = [&](double t, double dt) {
        nonlinear(uh, t, a);
        for (std::size_t m = 0; m < nk; ++m) tmp[m] = mul(e_half[m], uh[m] + 0.5 * dt * a[m]);
        nonlinear(tmp, t + 0.5 * dt, b);
        for (std::size_t m = 0; m < nk; ++m) tmp[m] = mul(e_half[m], uh[m]) + 0.5 * dt * b[m];
        nonlinear(tmp, t + 0.5 * dt, c);
        for (std::size_t m = 0; m < nk; ++m) tmp[m] = mul(e_full[m], uh[m]) + dt * mul(e_half[m], c[m]);
        nonlinear(tmp, t + dt, d);
        for (std::size_t m = 0; m < nk; ++m)
            uh[m] = mul(e_full[m], uh[m]) + dt / 6.0 * (mul(e_full[m], a[m]) + 2.0 * mul(e_half[m], b[m] + c[m]) + d[m]);
    };

    for (double stop : stops) {
        const double span = stop - t;
        if (span <= 0.0) continue;
        const auto steps = static_cast<std::size_t>(std::ceil(span / dt_target * (1.0 - 1e-12)));
        const double dt = span / static_cast<double>(std::max<std::size_t>(steps, 1));
        traj.dt = std::max(traj.dt, dt);
        set_coefficients(dt);
        for (std::size_t s = 0; s < steps; ++s) {
            if (cfg.scheme == Scheme::etdrk4) step_etdrk4(t, dt); else step_if_rk4(t, dt);
            t += dt;
            ++traj.steps;

            if (traj.steps % 64 == 0 || s + 1 == steps) {
                fft.inverse(uh, ureal);
                double umax = 0.0;
                for (double v : ureal) {
                    if (!std::isfinite(v)) throw NumericalError("evolve: non-finite field at t = " + std::to_string(t));
                    umax = std::max(umax, std::abs(v));
                }
                if (umax0 > 0.0 && umax > cfg.blowup_factor * umax0)
                    throw NumericalError("evolve: blow-up detected at t = " + std::to_string(t));
                double top = 0.0, peak = 0.0;
                const std::size_t k0 = k_cut - k_cut / 10;
                for (std::size_t m = 1; m < k_cut; ++m) {
                    const double amp = std::abs(uh[m]);
                    peak = std::max(peak, amp);
                    if (m >= k0) top = std::max(top, amp);
                }
                if (peak > 0.0 && top / peak > cfg.tail_threshold)
                    throw NumericalError("evolve: spectral tail " + std::to_string(top / peak) +
                                         " above threshold at t = " + std::to_string(t) + " (under-resolved)");
            }
        }
        t = stop;
        record(uh, t);
    }
    traj.max_undershoot = undershoot;
    return traj;
}

struct Peak {
    double position = 0.0;
    double amplitude = 0.0;
};

/// Local maxima above min_amplitude, refined by a parabola through three samples; sorted by position.
inline std::vector<Peak> extract_solitons(const WaveField& w, double min_amplitude)
{
    std::vector<Peak> peaks;
    const std::size_t n = w.size();
    if (n < 3) return peaks;
    for (std::size_t j = 0; j < n; ++j) {
        const double um = w.u[(j + n - 1) % n], u0 = w.u[j], up = w.u[(j + 1) % n];
        if (!(u0 > min_amplitude && u0 > um && u0 >= up)) continue;
        const double den = um - 2.0 * u0 + up;
        const double p = den != 0.0 ? 0.5 * (um - up) / den : 0.0;
        double pos = w.x(j) + p * w.dx();
        if (pos >= w.x0 + w.length) pos -= w.length;
        if (pos < w.x0) pos += w.length;
        peaks.push_back({pos, u0 - 0.25 * (um - up) * p});
    }
    std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.position < b.position; });
    return peaks;
}

} // namespace kdv
