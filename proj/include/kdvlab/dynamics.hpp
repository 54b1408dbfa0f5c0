#pragma once

// One-phase asymptotics of a soliton under a small local force F(x, t, u):
//   d/dt (a2 A^2 / beta) = 2 (A / beta) int omega F0 d eta,   d phi / dt = beta^2 = 2 g1(A),
// plus the long-wave tail u- left behind the soliton,
//   d u- / dt = F_u(x, t, 0) u-   for x < phi(t),
// with the boundary value on x = phi(t) fixed by the mass balance.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "kdvlab/error.hpp"
#include "kdvlab/nonlinearity.hpp"
#include "kdvlab/numerics.hpp"
#include "kdvlab/profile.hpp"

namespace kdv {

struct LocalForce {
    std::string name = "zero";
    std::function<double(double x, double t, double u)> value;
    std::function<double(double x, double t)> du_at_zero;

    [[nodiscard]] double operator()(double x, double t, double u) const { return value ? value(x, t, u) : 0.0; }
    [[nodiscard]] double fu0(double x, double t) const { return du_at_zero ? du_at_zero(x, t) : 0.0; }

    static LocalForce zero() { return {}; }

    /// F = mu (alpha - u) u.
    static LocalForce logistic(double mu, double alpha)
    {
        require(mu > 0.0 && alpha > 0.0, "logistic force needs mu > 0 and alpha > 0");
        LocalForce f;
        f.name = "logistic";
        f.value = [mu, alpha](double, double, double u) { return mu * (alpha - u) * u; };
        f.du_at_zero = [mu, alpha](double, double) { return mu * alpha; };
        return f;
    }
};

/// F(x, t, 0) = 0 on a few sample points.
inline bool vanishes_at_zero(const LocalForce& f)
{
    for (double x : {-10.0, -1.0, 0.0, 0.5, 3.0, 17.0})
        for (double t : {0.0, 1.0, 10.0})
            if (f(x, t, 0.0) != 0.0) return false;
    return true;
}

struct ForceMoments {
    double f_bar = 0.0;       // F(phi, t, A)
    double int_f0 = 0.0;      // int F0 d eta
    double int_omega_f0 = 0.0;
    double a_f0 = 0.0;        // int_f0 / f_bar
    double a_omega_f0 = 0.0;  // int_omega_f0 / f_bar
    bool normalized = true;   // false when f_bar = 0: a_* hold the raw integrals
};

inline ForceMoments force_moments(const SolitonProfile& p, double amplitude, const LocalForce& force, double phi, double t)
{
    ForceMoments m;
    const auto w = p.omega();
    std::vector<double> f0(w.size()), wf0(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) {
        f0[j] = force(phi, t, amplitude * w[j]);
        wf0[j] = w[j] * f0[j];
    }
    m.int_f0 = num::trapezoid(f0, p.step());
    m.int_omega_f0 = num::trapezoid(wf0, p.step());
    m.f_bar = force(phi, t, amplitude);
    if (m.f_bar != 0.0) {
        m.a_f0 = m.int_f0 / m.f_bar;
        m.a_omega_f0 = m.int_omega_f0 / m.f_bar;
    } else {
        m.normalized = false;
        m.a_f0 = m.int_f0;
        m.a_omega_f0 = m.int_omega_f0;
    }
    return m;
}

struct PerturbedTrajectory {
    std::vector<double> t, amplitude, beta, phi, f_bar, damp_dt;
    std::vector<double> int_f0;      // int F0 d eta along the trajectory
    std::vector<double> a1, a2;      // profile moments used at each sample
    std::size_t profile_solves = 0;

    [[nodiscard]] double step() const { return t[1] - t[0]; }
    [[nodiscard]] double at(const std::vector<double>& v, double time) const
    {
        return num::lagrange8(v, t.front(), step(), time);
    }
};

struct OnePhaseOptions {
    double t_end = 10.0;
    std::size_t samples = 1001;
    double tolerance = 1e-12;
    double moment_threshold = 1e-3;  // relative change of A that triggers new moments
    ProfileGrid grid{};
};

namespace detail {

/// Profile and moments at a reference amplitude, refreshed when A drifts away from it.
class MomentCache {
public:
    MomentCache(const Nonlinearity& nl, const ProfileGrid& grid, double threshold)
        : nl_(&nl), grid_(grid), threshold_(threshold)
    {
    }

    struct Entry {
        double amplitude = 0.0;
        SolitonProfile profile;
        MomentSet moments{};
        double da1 = 0.0, da2 = 0.0;  // d a_i / d A
    };

    const Entry& get(double a)
    {
        const bool stale = !entry_ || (!nl_->homogeneous_form() && std::abs(a / entry_->amplitude - 1.0) > threshold_);
        if (stale) refresh(a);
        return *entry_;
    }

    [[nodiscard]] std::size_t solves() const { return solves_; }

private:
    void refresh(double a)
    {
        Entry e;
        e.amplitude = a;
        e.profile = solve_profile(*nl_, a, grid_);
        e.moments = moments(*nl_, e.profile);
        ++solves_;
        if (!nl_->homogeneous_form()) {
            const double h = 1e-3 * a;
            const auto mp = moments(*nl_, solve_profile(*nl_, a + h, grid_));
            const auto mm = moments(*nl_, solve_profile(*nl_, a - h, grid_));
            solves_ += 2;
            e.da1 = (mp.a1 - mm.a1) / (2.0 * h);
            e.da2 = (mp.a2 - mm.a2) / (2.0 * h);
        }
        entry_ = std::move(e);
    }

    const Nonlinearity* nl_;
    ProfileGrid grid_;
    double threshold_;
    std::optional<Entry> entry_;
    std::size_t solves_ = 0;
};

} // namespace detail

/// Integrates the amplitude and phase equations with an adaptive Dormand-Prince scheme.
inline PerturbedTrajectory evolve_one_phase(const Nonlinearity& nl, const LocalForce& force, double a0, double phi0,
                                            const OnePhaseOptions& opt = {})
{
    require(a0 > 0.0, "initial amplitude must be positive");
    require(opt.t_end > 0.0 && opt.samples >= 9, "one-phase run needs t_end > 0 and at least 9 samples");
    require(vanishes_at_zero(force), "force must vanish at u = 0");
    detail::MomentCache cache(nl, opt.grid, opt.moment_threshold);

    auto check = [&](double a, double t) {
        if (!(a > 0.0) || !std::isfinite(a))
            throw RegimeError("one-phase run: amplitude left (0, u_max] at t = " + std::to_string(t));
        if (a > nl.u_max())
            throw RegimeError("one-phase run: amplitude above the validated range at t = " + std::to_string(t));
    };

    // d A / dt from d M / dt = 2 (A / beta) int omega F0, M = a2 A^2 / beta
    auto amplitude_rate = [&](double a, double phi, double t) {
        const auto& e = cache.get(a);
        const double beta = std::sqrt(2.0 * nl.g1(a));
        const double dbeta = nl.g1_prime(a) / beta;
        const double dm = e.da2 * a * a / beta + e.moments.a2 * (2.0 * a / beta - a * a * dbeta / (beta * beta));
        const auto fm = force_moments(e.profile, a, force, phi, t);
        return 2.0 * (a / beta) * fm.int_omega_f0 / dm;
    };

    using State = std::vector<double>;
    auto rhs = [&](const State& y, State& dy, double t) {
        check(y[0], t);
        dy[0] = amplitude_rate(y[0], y[1], t);
        dy[1] = 2.0 * nl.g1(y[0]);
    };

    PerturbedTrajectory tr;
    tr.t = num::linspace(0.0, opt.t_end, opt.samples);
    State y{a0, phi0};
    auto stepper = boost::numeric::odeint::make_dense_output(opt.tolerance, opt.tolerance,
                                                             boost::numeric::odeint::runge_kutta_dopri5<State>());
    std::vector<State> ys;
    boost::numeric::odeint::integrate_times(stepper, rhs, y, tr.t.begin(), tr.t.end(), tr.t[1] - tr.t[0],
                                            [&](const State& s, double) { ys.push_back(s); });
    if (ys.size() != tr.t.size()) throw NumericalError("one-phase run: integrator returned an incomplete trajectory");

    for (std::size_t k = 0; k < ys.size(); ++k) {
        const double a = ys[k][0], phi = ys[k][1], t = tr.t[k];
        check(a, t);
        const auto& e = cache.get(a);
        const auto fm = force_moments(e.profile, a, force, phi, t);
        tr.amplitude.push_back(a);
        tr.phi.push_back(phi);
        tr.beta.push_back(std::sqrt(2.0 * nl.g1(a)));
        tr.f_bar.push_back(fm.f_bar);
        tr.int_f0.push_back(fm.int_f0);
        tr.damp_dt.push_back(amplitude_rate(a, phi, t));
        tr.a1.push_back(e.moments.a1 + e.da1 * (a - e.amplitude));
        tr.a2.push_back(e.moments.a2 + e.da2 * (a - e.amplitude));
    }
    tr.profile_solves = cache.solves();
    return tr;
}

/// Closed-form amplitude law for g'(u) = u^{3/2} under F = mu (alpha - u) u.
struct LogisticLaw {
    double a0 = 0.0;
    double mu_prime = 0.0;  // 8 alpha mu / 7
    double a_star = 0.0;    // alpha a2 / a3
    double a2 = 0.0, a3 = 0.0;

    [[nodiscard]] double operator()(double t) const
    {
        const double c = a0 / a_star;
        const double e = std::exp(mu_prime * t);
        return a0 * e / (1.0 + c * (e - 1.0));
    }
};

inline LogisticLaw logistic_reference(double a0, double mu, double alpha, const Nonlinearity& nl, const ProfileGrid& grid = {})
{
    require(a0 > 0.0 && mu > 0.0 && alpha > 0.0, "logistic law needs A0, mu, alpha > 0");
    require(nl.homogeneous_form() && std::abs(nl.leading_exponent() - 0.5) < 1e-14,
            "logistic law holds for g'(u) proportional to u^{3/2}");
    const auto m = moments(nl, solve_profile(nl, 1.0, grid));
    LogisticLaw law;
    law.a0 = a0;
    law.mu_prime = 8.0 * alpha * mu / 7.0;
    law.a2 = m.a2;
    law.a3 = m.a3;
    law.a_star = alpha * m.a2 / m.a3;
    return law;
}

struct TailOptions {
    double t_end = 0.0;          // 0: end of the trajectory
    std::size_t time_samples = 401;
    bool epsilon_variant = false; // d u / dt = F(x, t, eps u) / eps instead of the linearisation
    double epsilon = 0.05;
    double tolerance = 1e-10;
};

struct TailField {
    std::vector<double> x, t;
    std::vector<std::vector<double>> u;  // u[it][ix], zero ahead of the soliton
    std::vector<double> entry_time, boundary_value;

    /// max over x of u-(x, t_k).
    [[nodiscard]] std::vector<double> max_profile() const
    {
        std::vector<double> m(t.size(), 0.0);
        for (std::size_t k = 0; k < t.size(); ++k)
            for (double v : u[k]) m[k] = std::max(m[k], v);
        return m;
    }
};

/// u-(phi, t) from the mass balance: [int F0 / beta - d/dt (a1 A / beta)] / (d phi / dt).
inline std::vector<double> tail_boundary_values(const Nonlinearity& nl, const PerturbedTrajectory& tr)
{
    std::vector<double> ub(tr.t.size());
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
        const double a = tr.amplitude[k], beta = tr.beta[k];
        const double dbeta = nl.g1_prime(a) / beta;
        // a1 varies with A only for inhomogeneous g; its slope is folded in through the stored samples
        double da1 = 0.0;
        if (k > 0 && k + 1 < tr.t.size() && tr.amplitude[k + 1] != tr.amplitude[k - 1])
            da1 = (tr.a1[k + 1] - tr.a1[k - 1]) / (tr.amplitude[k + 1] - tr.amplitude[k - 1]);
        const double dmass = (da1 * a / beta + tr.a1[k] * (1.0 / beta - a * dbeta / (beta * beta))) * tr.damp_dt[k];
        const double speed = beta * beta;
        if (!(speed > 0.0)) throw RegimeError("tail: d phi / dt vanishes, boundary value undefined");
        ub[k] = (tr.int_f0[k] / beta - dmass) / speed;
    }
    return ub;
}

inline TailField solve_tail(const Nonlinearity& nl, const LocalForce& force, const PerturbedTrajectory& tr,
                            std::vector<double> x_grid, const TailOptions& opt = {})
{
    const double t_end = opt.t_end > 0.0 ? opt.t_end : tr.t.back();
    require(t_end <= tr.t.back() + 1e-12, "tail: trajectory does not cover t_end");
    require(opt.time_samples >= 2, "tail: need at least two output times");
    require(!opt.epsilon_variant || opt.epsilon > 0.0, "tail: epsilon must be positive");
    for (std::size_t k = 1; k < tr.phi.size(); ++k)
        if (!(tr.phi[k] > tr.phi[k - 1])) throw RegimeError("tail: soliton trajectory is not strictly increasing");

    const auto ub = tail_boundary_values(nl, tr);
    TailField tf;
    tf.x = std::move(x_grid);
    tf.t = num::linspace(0.0, t_end, opt.time_samples);
    tf.u.assign(tf.t.size(), std::vector<double>(tf.x.size(), 0.0));
    tf.entry_time.resize(tf.x.size());
    tf.boundary_value.resize(tf.x.size());

    const double phi0 = tr.phi.front();
    const double phi_end = tr.at(tr.phi, t_end);
    using State = std::vector<double>;
    namespace ode = boost::numeric::odeint;

    for (std::size_t i = 0; i < tf.x.size(); ++i) {
        const double x = tf.x[i];
        if (!(x > phi0 && x <= phi_end))
            throw ValidationError("tail: x = " + std::to_string(x) + " is not crossed by the soliton in [0, t_end]");
        // entry time: phi(t_x) = x
        double lo = 0.0, hi = t_end;
        for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
            const double mid = 0.5 * (lo + hi);
            if (tr.at(tr.phi, mid) < x) lo = mid; else hi = mid;
        }
        const double tx = 0.5 * (lo + hi);
        const double u0 = tr.at(ub, tx);
        tf.entry_time[i] = tx;
        tf.boundary_value[i] = u0;

        std::vector<double> times{tx};
        std::size_t first = 0;
        while (first < tf.t.size() && tf.t[first] <= tx) ++first;
        for (std::size_t k = first; k < tf.t.size(); ++k) times.push_back(tf.t[k]);
        if (times.size() < 2) continue;

        auto rhs = [&](const State& y, State& dy, double t) {
            if (opt.epsilon_variant)
                dy[0] = force(x, t, opt.epsilon * y[0]) / opt.epsilon;
            else
                dy[0] = force.fu0(x, t) * y[0];
        };
        State y{u0};
        auto stepper = ode::make_dense_output(opt.tolerance, opt.tolerance, ode::runge_kutta_dopri5<State>());
        std::size_t k = first;
        bool skip_first = true;
        ode::integrate_times(stepper, rhs, y, times.begin(), times.end(), 1e-3, [&](const State& s, double) {
            if (skip_first) {
                skip_first = false;
                return;
            }
            tf.u[k++][i] = s[0];
        });
    }
    return tf;
}

struct CriticalTime {
    double estimate = 0.0;  // ln(1/(eps mu)) / (alpha mu)
    double measured = std::numeric_limits<double>::quiet_NaN();  // first t with max eps u- >= A(t)
    double growth_rate = 0.0;  // fitted exponential rate of max u-
};

inline double critical_time_estimate(double epsilon, double mu, double alpha)
{
    require(epsilon > 0.0 && mu > 0.0 && alpha > 0.0, "critical time needs eps, mu, alpha > 0");
    require(epsilon * mu < 1.0, "critical time needs eps mu < 1");
    return std::log(1.0 / (epsilon * mu)) / (alpha * mu);
}

/// Compares the scaling estimate with a tail run; the growth rate is fitted on the second half
/// of the samples preceding the measured time (or all samples when the threshold is never reached).
inline CriticalTime critical_time(double epsilon, double mu, double alpha, const PerturbedTrajectory& tr,
                                  const TailField& tail)
{
    CriticalTime ct;
    ct.estimate = critical_time_estimate(epsilon, mu, alpha);
    const auto mx = tail.max_profile();
    std::size_t stop = tail.t.size();
    for (std::size_t k = 0; k < tail.t.size(); ++k) {
        const double a = tr.at(tr.amplitude, tail.t[k]);
        if (epsilon * mx[k] >= a) {
            if (k == 0) {
                ct.measured = tail.t[0];
            } else {
                // linear interpolation of eps max u- - A between samples
                const double a_prev = tr.at(tr.amplitude, tail.t[k - 1]);
                const double g0 = epsilon * mx[k - 1] - a_prev, g1 = epsilon * mx[k] - a;
                ct.measured = tail.t[k - 1] + (tail.t[k] - tail.t[k - 1]) * g0 / (g0 - g1);
            }
            stop = k;
            break;
        }
    }
    std::vector<double> ts, ls;
    for (std::size_t k = stop / 2; k < stop; ++k) {
        if (mx[k] > 0.0) {
            ts.push_back(tail.t[k]);
            ls.push_back(std::log(mx[k]));
        }
    }
    if (ts.size() >= 2) ct.growth_rate = num::fit_line(ts, ls).slope;
    return ct;
}

} // namespace kdv
