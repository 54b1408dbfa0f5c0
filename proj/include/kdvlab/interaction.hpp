#pragma once

// Weak-asymptotics model of a two-soliton collision.
//
// Soliton 1 (amplitude A1) starts ahead of the faster soliton 2 (A2 > A1).
// During the overlap the ansatz
//     u = sum_i G_i(tau) omega(beta_i (x - phi_i)/eps, A_i),  G_i = A_i + S_i,
//     phi_i = V_i t + x_i0 + eps phi_i1(tau),  tau = beta1 (phi_20 - phi_10)/eps,
// carries amplitude corrections S_i fixed by two algebraic balances and phase
// corrections phi_i1 driven by the scaled phase difference sigma(tau).
//
// All tau-dependence enters through sigma, so the model is tabulated on a
// uniform sigma grid and mapped to tau through d tau / d sigma = Q'(sigma) / Frc(sigma).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kdvlab/error.hpp"
#include "kdvlab/nonlinearity.hpp"
#include "kdvlab/numerics.hpp"
#include "kdvlab/profile.hpp"
#include "kdvlab/wave_field.hpp"

namespace kdv {

struct InteractionConfig {
    double a1 = 1.0;   // slower, leading soliton
    double a2 = 2.0;   // faster, trailing soliton
    double x1_0 = 1.0;
    double x2_0 = 0.0;
    ProfileGrid grid{};
    /// Drop every overlap term; the model then reduces to two free solitons.
    bool cross_terms = true;
};

struct CollisionGeometry {
    double v1 = 0, v2 = 0;
    double beta1 = 0, beta2 = 0;
    double theta = 0;     // beta1 / beta2
    double t_star = 0;    // crossing time of the free trajectories
    double x_star = 0;    // crossing point
    double psi_dot = 0;   // beta1 (V2 - V1)
    double q_prime = 0;   // 2 / q_n
    double c_prime = 0;   // (2 c_n)^{-1/q_n}
};

inline CollisionGeometry collision_geometry(const Nonlinearity& nl, const InteractionConfig& cfg)
{
    require(cfg.a1 > 0.0 && cfg.a2 > cfg.a1, "collision needs A2 > A1 > 0");
    require(cfg.x1_0 > cfg.x2_0, "collision needs x1_0 > x2_0 (fast soliton behind)");
    CollisionGeometry g;
    const auto s1 = speed_and_width(nl, cfg.a1);
    const auto s2 = speed_and_width(nl, cfg.a2);
    g.v1 = s1.speed;
    g.v2 = s2.speed;
    if (!(g.v2 > g.v1)) throw ValidationError("collision needs V2 > V1");
    g.beta1 = s1.beta;
    g.beta2 = s2.beta;
    g.theta = g.beta1 / g.beta2;
    g.t_star = (cfg.x1_0 - cfg.x2_0) / (g.v2 - g.v1);
    g.x_star = g.v1 * g.t_star + cfg.x1_0;
    g.psi_dot = g.beta1 * (g.v2 - g.v1);
    g.q_prime = 2.0 / nl.leading_exponent();
    g.c_prime = std::pow(2.0 * nl.leading_coefficient(), -1.0 / nl.leading_exponent());
    return g;
}

/// Normalised overlap integrals at one sigma:
/// R0 = int omega1(theta eta - sigma) omega2(eta) / a2~, R1 the same with a factor eta,
/// R21 = int omega1'(theta eta - sigma) omega2'(eta) / a2'~.
struct Convolutions {
    double r0 = 0.0;
    double r1 = 0.0;
    double r21 = 0.0;
};

/// Amplitude corrections and derived quantities at one sigma.
struct CorrectionState {
    double sigma = 0.0;
    Convolutions conv{};
    double s1 = 0.0, s2 = 0.0;
    double g1 = 0.0, g2 = 0.0;            // G_i = A_i + S_i
    double kappa1 = 0.0, kappa2 = 0.0;    // rescaled corrections
    double eq1_residual = 0.0;            // sum a_{1,i} K_{i1}^{(1)}
    double eq2_residual = 0.0;            // second balance, relative to its largest term
};

/// Right-hand sides of the phase equations and the sigma dynamics at one sigma.
struct InteractionRhs {
    double f = 0.0;        // (g'(A2)/beta2) R_{g'}
    double F = 0.0;
    double Q = 0.0;
    double forcing = 0.0;  // d Q / d tau
    double frak_gprime = 0.0;
    double frak_g2 = 0.0;
};

class CollisionModel {
public:
    CollisionModel(Nonlinearity nl, InteractionConfig cfg) : nl_(std::move(nl)), cfg_(cfg)
    {
        geo_ = collision_geometry(nl_, cfg_);
        p1_ = solve_profile(nl_, cfg_.a1, cfg_.grid);
        p2_ = solve_profile(nl_, cfg_.a2, cfg_.grid);
        m1_ = kdv::moments(nl_, p1_);
        m2_ = kdv::moments(nl_, p2_);
        a2_tilde_ = std::sqrt(m1_.a2 * m2_.a2);
        a2p_tilde_ = std::sqrt(m1_.a2_prime * m2_.a2_prime);
        abar1_ = m1_.a1 / m2_.a1;
        abar2_ = m1_.a2 / m2_.a2;
        const double b1 = geo_.beta1, b2 = geo_.beta2;
        k10_1_ = cfg_.a1 / b1;
        k20_1_ = cfg_.a2 / b2;
        k10_2_ = cfg_.a1 * cfg_.a1 / b1;
        k20_2_ = cfg_.a2 * cfg_.a2 / b2;
        r1_ = k10_1_ + (m2_.a1 / m1_.a1) * k20_1_;
        r2_ = k10_2_ + (m2_.a2 / m1_.a2) * k20_2_;
        s_ratio_ = -(m1_.a1 * b2) / (m2_.a1 * b1);
        if (geo_.theta > 0.5)
            warnings_.push_back("regime: theta = " + std::to_string(geo_.theta) +
                                " > 0.5, outside the small-theta regime of the asymptotic analysis");
    }

    [[nodiscard]] const Nonlinearity& nonlinearity() const { return nl_; }
    [[nodiscard]] const InteractionConfig& config() const { return cfg_; }
    [[nodiscard]] const CollisionGeometry& geometry() const { return geo_; }
    [[nodiscard]] const SolitonProfile& profile1() const { return p1_; }
    [[nodiscard]] const SolitonProfile& profile2() const { return p2_; }
    [[nodiscard]] const MomentSet& moments1() const { return m1_; }
    [[nodiscard]] const MomentSet& moments2() const { return m2_; }
    [[nodiscard]] double a2_tilde() const { return a2_tilde_; }
    [[nodiscard]] double a2p_tilde() const { return a2p_tilde_; }
    [[nodiscard]] double abar1() const { return abar1_; }
    [[nodiscard]] double abar2() const { return abar2_; }
    [[nodiscard]] double r1() const { return r1_; }
    [[nodiscard]] double r2() const { return r2_; }
    /// S2 = s_ratio * S1 from the first balance.
    [[nodiscard]] double s_ratio() const { return s_ratio_; }
    [[nodiscard]] double k10_1() const { return k10_1_; }
    [[nodiscard]] double k10_2() const { return k10_2_; }
    [[nodiscard]] const std::vector<std::string>& warnings() const { return warnings_; }

    /// Beyond this |sigma| every overlap term is below 1e-30 and is dropped.
    [[nodiscard]] double sigma_cutoff() const
    {
        return p1_.eta_max() + geo_.theta * p2_.eta_max() + 35.0;
    }

    /// Leading-order small-theta prediction of kappa1.
    [[nodiscard]] double kappa1_leading(double r0) const
    {
        return std::sqrt(abar2_) / abar1_ * std::pow(geo_.theta, geo_.q_prime) * r0;
    }

private:
    Nonlinearity nl_;
    InteractionConfig cfg_;
    CollisionGeometry geo_{};
    SolitonProfile p1_, p2_;
    MomentSet m1_{}, m2_{};
    double a2_tilde_ = 0, a2p_tilde_ = 0, abar1_ = 0, abar2_ = 0;
    double k10_1_ = 0, k20_1_ = 0, k10_2_ = 0, k20_2_ = 0;
    double r1_ = 0, r2_ = 0, s_ratio_ = 0;
    std::vector<std::string> warnings_;
};

namespace detail {

/// omega1(theta eta_j - sigma) and its derivative on the eta grid of soliton 2.
struct OverlapSamples {
    std::vector<double> w1, dw1;
};

inline OverlapSamples overlap_samples(const CollisionModel& model, double sigma)
{
    const auto& p1 = model.profile1();
    const double theta = model.geometry().theta;
    const auto eta = model.profile2().eta();
    OverlapSamples s;
    s.w1.resize(eta.size());
    s.dw1.resize(eta.size());
    for (std::size_t j = 0; j < eta.size(); ++j) {
        const double x = theta * eta[j] - sigma;
        s.w1[j] = p1(x);
        s.dw1[j] = p1.derivative(x);
    }
    return s;
}

inline bool overlapping(const CollisionModel& model, double sigma)
{
    return model.config().cross_terms && std::abs(sigma) <= model.sigma_cutoff();
}

inline Convolutions convolutions(const CollisionModel& model, const OverlapSamples& s)
{
    const auto& p2 = model.profile2();
    const auto eta = p2.eta();
    const auto w2 = p2.omega();
    const auto dw2 = p2.omega_prime();
    // the end samples are below 1e-24, so plain sums are the trapezoid rule
    double s0 = 0.0, s1 = 0.0, s21 = 0.0;
    for (std::size_t j = 0; j < eta.size(); ++j) {
        s0 += s.w1[j] * w2[j];
        s1 += eta[j] * s.w1[j] * w2[j];
        s21 += s.dw1[j] * dw2[j];
    }
    const double h = p2.step();
    return {s0 * h / model.a2_tilde(), s1 * h / model.a2_tilde(), s21 * h / model.a2p_tilde()};
}

} // namespace detail

inline Convolutions convolutions(const CollisionModel& model, double sigma)
{
    if (!detail::overlapping(model, sigma)) return {};
    return detail::convolutions(model, detail::overlap_samples(model, sigma));
}

inline CorrectionState amplitude_corrections(const CollisionModel& model, double sigma, const Convolutions& conv)
{
    const auto& cfg = model.config();
    const auto& geo = model.geometry();
    const auto& m1 = model.moments1();
    const auto& m2 = model.moments2();
    const double A1 = cfg.a1, A2 = cfg.a2, b1 = geo.beta1, b2 = geo.beta2;
    const double m = model.s_ratio();
    const double at = model.a2_tilde();
    const double R = conv.r0;

    CorrectionState st;
    st.sigma = sigma;
    st.conv = conv;

    // second balance after S2 = m S1: c2 S1^2 + c1 S1 + c0 = 0
    const double c2 = m1.a2 / b1 + m2.a2 * m * m / b2 + 2.0 * at * R * m / b2;
    const double c1 = 2.0 * m1.a2 * A1 / b1 + 2.0 * m2.a2 * A2 * m / b2 + 2.0 * at * R * (A1 * m + A2) / b2;
    const double c0 = 2.0 * at * R * A1 * A2 / b2;
    double s1 = 0.0;
    if (c0 != 0.0) {
        const double disc = c1 * c1 - 4.0 * c2 * c0;
        if (disc < 0.0)
            throw RegimeError("amplitude corrections: negative discriminant at sigma = " + std::to_string(sigma));
        // root that vanishes with the overlap
        s1 = -2.0 * c0 / (c1 + std::copysign(std::sqrt(disc), c1));
    }
    st.s1 = s1;
    st.s2 = m * s1;
    st.g1 = A1 + st.s1;
    st.g2 = A2 + st.s2;

    st.eq1_residual = m1.a1 * st.s1 / b1 + m2.a1 * st.s2 / b2;
    const double t1 = m1.a2 * st.s1 * (2.0 * A1 + st.s1) / b1;
    const double t2 = m2.a2 * st.s2 * (2.0 * A2 + st.s2) / b2;
    const double t3 = 2.0 * at * st.g1 * st.g2 * R / b2;
    const double scale = std::max({std::abs(t1), std::abs(t2), std::abs(t3), 1e-300});
    st.eq2_residual = (t1 + t2 + t3) / scale;

    const double norm = geo.c_prime * std::pow(b2, geo.q_prime - 1.0);
    st.kappa1 = st.s1 / b1 / norm;
    st.kappa2 = st.s2 / b2 / norm;
    return st;
}

inline CorrectionState amplitude_corrections(const CollisionModel& model, double sigma)
{
    return amplitude_corrections(model, sigma, convolutions(model, sigma));
}

namespace detail {

struct CrossMoments {
    double gprime = 0.0;  // frak R for F = g'
    double g2 = 0.0;      // frak R for F = g2
};

/// F(A2)^{-1} int { F(G1 w1 + G2 w2) - F(A1 w1) - F(A2 w2) } d eta for F = g' and F = g2,
/// split into the overlap part and the amplitude-change parts of each soliton.
inline CrossMoments cross_moments(const CollisionModel& model, const CorrectionState& st, const OverlapSamples& s)
{
    const auto& terms = model.nonlinearity().terms();
    const auto& p1 = model.profile1();
    const auto& p2 = model.profile2();
    const double theta = model.geometry().theta;
    const double A1 = model.config().a1, A2 = model.config().a2;
    const double G1 = st.g1, G2 = st.g2;

    struct Pair {
        double gp = 0.0, g2 = 0.0;
        void add(double dgp, double dg2) { gp += dgp; g2 += dg2; }
    };
    // g'(u) and g2(u) share the power u^{q+1}
    auto eval = [&](double u, double& gp, double& g2) {
        gp = 0.0;
        g2 = 0.0;
        if (u <= 0.0) return;
        for (const auto& t : terms) {
            const double p = t.coefficient * detail::fast_pow(u, t.exponent + 1.0);
            gp += (t.exponent + 2.0) * p;
            g2 -= (t.exponent + 1.0) * u * p;
        }
    };

    const auto w2 = p2.omega();
    Pair overlap, own2;
    double a, b, c, d, e, f, gg, hh;
    for (std::size_t j = 0; j < w2.size(); ++j) {
        const double u1 = G1 * s.w1[j], u2 = G2 * w2[j];
        eval(u1 + u2, a, b);
        eval(u1, c, d);
        eval(u2, e, f);
        overlap.add(a - c - e, b - d - f);
        eval(A2 * w2[j], gg, hh);
        own2.add(e - gg, f - hh);
    }
    // amplitude change of soliton 1 over its own width, d eta = d xi / theta
    Pair own1;
    if (st.s1 != 0.0) {
        for (double w1 : p1.omega()) {
            eval(G1 * w1, a, b);
            eval(A1 * w1, c, d);
            own1.add(a - c, b - d);
        }
    }
    double ref_gp, ref_g2;
    eval(A2, ref_gp, ref_g2);
    const double h2 = p2.step(), h1 = p1.step() / theta;
    return {(h2 * (overlap.gp + own2.gp) + h1 * own1.gp) / ref_gp,
            (h2 * (overlap.g2 + own2.g2) + h1 * own1.g2) / ref_g2};
}

} // namespace detail

namespace detail {

inline InteractionRhs interaction_rhs(const CollisionModel& model, const CorrectionState& st, const OverlapSamples* s)
{
    const auto& nl = model.nonlinearity();
    const auto& cfg = model.config();
    const auto& geo = model.geometry();
    const auto& m1 = model.moments1();
    const auto& m2 = model.moments2();
    const double A2 = cfg.a2, b1 = geo.beta1, b2 = geo.beta2;

    InteractionRhs r;
    if (s != nullptr) {
        const auto cm = cross_moments(model, st, *s);
        r.frak_gprime = cm.gprime;
        r.frak_g2 = cm.g2;
    }
    r.f = nl.g_prime(A2) / b2 * r.frak_gprime;

    const double k11_2 = st.s1 * (2.0 * cfg.a1 + st.s1) / b1;
    const double k21_2 = st.s2 * (2.0 * cfg.a2 + st.s2) / b2;
    r.F = -2.0 * nl.g2(A2) / b2 * r.frak_g2 -
          3.0 * (m1.a2_prime * b1 * b1 * k11_2 + m2.a2_prime * b2 * b2 * k21_2 +
                 2.0 * model.a2p_tilde() * b1 * st.g1 * st.g2 * st.conv.r21);

    const double k1_1 = st.g1 / b1, k2_1 = st.g2 / b2, k1_2 = st.g1 * st.g1 / b1;
    const double rr = model.r2() / model.r1();
    r.Q = st.sigma / b1 * (k1_2 - rr * k1_1) + 2.0 * geo.theta / std::sqrt(model.abar2()) * k1_1 * k2_1 * st.conv.r1;
    r.forcing = -(model.k10_2() - rr * model.k10_1()) / b1 +
                (r.F / m1.a2 - model.r2() * r.f / (m1.a1 * model.r1())) / geo.psi_dot;
    return r;
}

} // namespace detail

inline InteractionRhs interaction_rhs(const CollisionModel& model, const CorrectionState& st)
{
    if (!detail::overlapping(model, st.sigma)) return detail::interaction_rhs(model, st, nullptr);
    const auto s = detail::overlap_samples(model, st.sigma);
    return detail::interaction_rhs(model, st, &s);
}

/// The model tabulated on a uniform ascending sigma grid over [-cutoff, cutoff].
struct SigmaTable {
    double sigma0 = 0.0;
    double step = 0.0;
    std::vector<double> sigma, r0, r1, r21, s1, s2, f, F, Q, dQ, forcing;
    std::vector<double> sigma_tilde;  // sigma + tau(sigma), zero at the anchor
    std::vector<double> f_integral;   // int_{tau_min}^{tau(sigma)} f d tau
    double min_eq2_residual = 0.0;
    double max_eq1_residual = 0.0;
    double max_eq2_residual = 0.0;

    [[nodiscard]] double interp(const std::vector<double>& v, double s) const
    {
        return num::lagrange8(v, sigma0, step, s);
    }
    [[nodiscard]] double tau_of(double s) const { return interp(sigma_tilde, s) - s; }
};

struct SolveOptions {
    double tau_max = 0.0;       // 0: default 40 / theta
    double tau_step = 0.05;
    double sigma_step = 0.05;
};

/// sigma(tau) on a uniform tau grid together with the underlying table.
struct SigmaTrajectory {
    std::vector<double> tau;
    std::vector<double> sigma;
    std::vector<double> sigma_tilde;
    SigmaTable table;
    double sigma_tilde_minus = 0.0;  // limit sigma -> -inf, reached as tau -> +inf
    double sigma_tilde_plus = 0.0;   // limit sigma -> +inf, reached as tau -> -inf
};

inline SigmaTable build_sigma_table(const CollisionModel& model, double sigma_step, double anchor)
{
    require(sigma_step > 0.0, "sigma step must be positive");
    SigmaTable t;
    const double cut = model.sigma_cutoff();
    const auto n = static_cast<std::size_t>(std::ceil(2.0 * cut / sigma_step)) + 1;
    t.sigma = num::linspace(-cut, cut, n);
    t.sigma0 = -cut;
    t.step = t.sigma[1] - t.sigma[0];
    for (auto* v : {&t.r0, &t.r1, &t.r21, &t.s1, &t.s2, &t.f, &t.F, &t.Q, &t.forcing}) v->resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        CorrectionState st;
        InteractionRhs rhs;
        if (detail::overlapping(model, t.sigma[j])) {
            const auto samples = detail::overlap_samples(model, t.sigma[j]);
            st = amplitude_corrections(model, t.sigma[j], detail::convolutions(model, samples));
            rhs = detail::interaction_rhs(model, st, &samples);
        } else {
            st = amplitude_corrections(model, t.sigma[j], Convolutions{});
            rhs = detail::interaction_rhs(model, st, nullptr);
        }
        t.r0[j] = st.conv.r0;
        t.r1[j] = st.conv.r1;
        t.r21[j] = st.conv.r21;
        t.s1[j] = st.s1;
        t.s2[j] = st.s2;
        t.f[j] = rhs.f;
        t.F[j] = rhs.F;
        t.Q[j] = rhs.Q;
        t.forcing[j] = rhs.forcing;
        t.max_eq1_residual = std::max(t.max_eq1_residual, std::abs(st.eq1_residual));
        t.max_eq2_residual = std::max(t.max_eq2_residual, std::abs(st.eq2_residual));
    }
    t.dQ = num::derivative4(t.Q, t.step);
    std::vector<double> y(n), fy(n);
    for (std::size_t j = 0; j < n; ++j) {
        if (!(t.dQ[j] < 0.0))
            throw RegimeError("sigma dynamics: dQ/dsigma is not negative at sigma = " + std::to_string(t.sigma[j]));
        if (!(t.forcing[j] > 0.0))
            throw RegimeError("sigma dynamics: forcing is not positive at sigma = " + std::to_string(t.sigma[j]));
        const double dtau_dsigma = t.dQ[j] / t.forcing[j];
        y[j] = dtau_dsigma + 1.0;
        fy[j] = t.f[j] * dtau_dsigma;
    }
    // integrals measured from the top of the grid (tau -> -inf side)
    auto from_top = [&](const std::vector<double>& v) {
        auto c = num::cumulative_integral(v, t.step);
        const double top = c.back();
        for (double& x : c) x -= top;
        return c;
    };
    t.sigma_tilde = from_top(y);
    t.f_integral = from_top(fy);
    if (anchor < cut) {
        const double s0 = t.interp(t.sigma_tilde, anchor);
        const double f0 = t.interp(t.f_integral, anchor);
        for (double& x : t.sigma_tilde) x -= s0;
        for (double& x : t.f_integral) x -= f0;
    }
    return t;
}

/// Integrates dQ/dtau = forcing with sigma(tau_min) = -tau_min.
inline SigmaTrajectory solve_sigma(const CollisionModel& model, const SolveOptions& opt = {})
{
    const double T = opt.tau_max > 0.0 ? opt.tau_max : 40.0 / model.geometry().theta;
    require(opt.tau_step > 0.0, "tau step must be positive");
    SigmaTrajectory out;
    out.table = build_sigma_table(model, opt.sigma_step, T);
    const auto& tb = out.table;
    const double cut = model.sigma_cutoff();
    if (T < 30.0 && model.config().cross_terms) {
        const auto c = convolutions(model, T);
        if (c.r0 > 1e-10)
            throw ValidationError("solve_sigma: tau range too short, overlap at sigma = -tau_min is " +
                                  std::to_string(c.r0));
    }
    out.sigma_tilde_plus = tb.sigma_tilde.back();   // sigma -> +inf  <=> tau -> -inf
    out.sigma_tilde_minus = tb.sigma_tilde.front();
    const double tau_top = tb.tau_of(cut);       // tau at sigma = +cut
    const double tau_bottom = tb.tau_of(-cut);   // tau at sigma = -cut

    const auto n = static_cast<std::size_t>(std::llround(2.0 * T / opt.tau_step)) + 1;
    out.tau = num::linspace(-T, T, n);
    out.sigma.resize(n);
    out.sigma_tilde.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double tau = out.tau[k];
        double s;
        if (tau <= tau_top) {
            s = out.sigma_tilde_plus - tau;
        } else if (tau >= tau_bottom) {
            s = out.sigma_tilde_minus - tau;
        } else {
            // tau(sigma) is decreasing: bracket on the grid, then Newton on the interpolant
            std::size_t lo = 0, hi = tb.sigma.size() - 1;
            while (hi - lo > 1) {
                const std::size_t mid = (lo + hi) / 2;
                if (tb.sigma_tilde[mid] - tb.sigma[mid] > tau) lo = mid; else hi = mid;
            }
            s = tb.sigma[lo];
            for (int it = 0; it < 30; ++it) {
                const double g = tb.tau_of(s) - tau;
                const double dg = tb.interp(tb.dQ, s) / tb.interp(tb.forcing, s);
                const double ds = g / dg;
                s = std::clamp(s - ds, tb.sigma[lo], tb.sigma[hi]);
                if (std::abs(ds) < 1e-14) break;
            }
        }
        out.sigma[k] = s;
        out.sigma_tilde[k] = s + tau;
    }
    return out;
}

/// Pointwise state of the interaction solution.
struct InteractionPoint {
    double sigma = 0, sigma_tilde = 0, s1 = 0, s2 = 0, phi11 = 0, phi21 = 0;
};

struct InteractionSolution {
    std::vector<double> tau, sigma, sigma_tilde, s1, s2, phi11, phi21;
    double phi11_inf = 0.0, phi21_inf = 0.0;
    double sigma_tilde_minus = 0.0, sigma_tilde_plus = 0.0;
    double g1_at_zero = 0.0, g2_at_zero = 0.0;
    double max_eq1_residual = 0.0, max_eq2_residual = 0.0;
    double min_forcing = 0.0, max_dQ = 0.0;
    double v1 = 0.0, v2 = 0.0, psi_dot = 0.0;

    [[nodiscard]] double tau_min() const { return tau.front(); }
    [[nodiscard]] double tau_max() const { return tau.back(); }

    /// State at tau; throws outside the solved range unless clamp is set, in
    /// which case the limiting (free-soliton) values are returned.
    [[nodiscard]] InteractionPoint at(double t, bool clamp = false) const
    {
        InteractionPoint p;
        if (t < tau.front() || t > tau.back()) {
            if (!clamp) throw ValidationError("interaction solution queried outside its tau range");
            const bool before = t < tau.front();
            p.sigma_tilde = before ? sigma_tilde_minus : sigma_tilde_plus;
            p.sigma = p.sigma_tilde - t;
            p.phi11 = before ? 0.0 : phi11_inf;
            p.phi21 = before ? 0.0 : phi21_inf;
            return p;
        }
        const double h = tau[1] - tau[0];
        const double t0 = tau.front();
        p.sigma_tilde = num::lagrange8(sigma_tilde, t0, h, t);
        p.sigma = p.sigma_tilde - t;
        p.s1 = num::lagrange8(s1, t0, h, t);
        p.s2 = num::lagrange8(s2, t0, h, t);
        p.phi11 = num::lagrange8(phi11, t0, h, t);
        p.phi21 = num::lagrange8(phi21, t0, h, t);
        return p;
    }

    /// chi_i = V_i tau / psi_dot + phi_i1.
    [[nodiscard]] std::pair<double, double> chi(std::size_t k) const
    {
        return {v1 * tau[k] / psi_dot + phi11[k], v2 * tau[k] / psi_dot + phi21[k]};
    }
};

/// Phase corrections from the first phase equation with the secular part removed
/// analytically:
///   r1 phi21 = -sigma~ K1/beta1 + tau K11/beta1 + (a11 psi_dot)^{-1} int f d tau,
///   phi11 = phi21 + sigma~ / beta1.
inline InteractionSolution phase_corrections(const CollisionModel& model, const SigmaTrajectory& traj)
{
    const auto& geo = model.geometry();
    const auto& cfg = model.config();
    const auto& tb = traj.table;
    const double b1 = geo.beta1, r1 = model.r1(), a11 = model.moments1().a1;
    const double cut = model.sigma_cutoff();

    InteractionSolution sol;
    sol.tau = traj.tau;
    sol.sigma = traj.sigma;
    sol.sigma_tilde = traj.sigma_tilde;
    sol.sigma_tilde_minus = traj.sigma_tilde_plus;  // tau -> -inf is sigma -> +inf
    sol.sigma_tilde_plus = traj.sigma_tilde_minus;
    sol.v1 = geo.v1;
    sol.v2 = geo.v2;
    sol.psi_dot = geo.psi_dot;
    sol.max_eq1_residual = tb.max_eq1_residual;
    sol.max_eq2_residual = tb.max_eq2_residual;
    sol.min_forcing = *std::min_element(tb.forcing.begin(), tb.forcing.end());
    sol.max_dQ = *std::max_element(tb.dQ.begin(), tb.dQ.end());

    const std::size_t n = sol.tau.size();
    for (auto* v : {&sol.s1, &sol.s2, &sol.phi11, &sol.phi21}) v->resize(n);
    const double f_top = tb.f_integral.back(), f_bottom = tb.f_integral.front();

    auto phi21_of = [&](double tau, double sig, double st, double s1, double fint) {
        (void)sig;
        const double k1 = (cfg.a1 + s1) / b1;
        const double k11 = s1 / b1;
        return (-st * k1 / b1 + tau * k11 / b1 + fint / (a11 * geo.psi_dot)) / r1;
    };

    for (std::size_t k = 0; k < n; ++k) {
        const double s = sol.sigma[k];
        double s1 = 0.0, fint;
        if (s >= cut) {
            fint = f_top;
        } else if (s <= -cut) {
            fint = f_bottom;
        } else {
            s1 = tb.interp(tb.s1, s);
            fint = tb.interp(tb.f_integral, s);
        }
        sol.s1[k] = s1;
        sol.s2[k] = model.s_ratio() * s1;
        sol.phi21[k] = phi21_of(sol.tau[k], s, sol.sigma_tilde[k], s1, fint);
        sol.phi11[k] = sol.phi21[k] + sol.sigma_tilde[k] / b1;
    }
    sol.phi21_inf = phi21_of(0.0, 0.0, sol.sigma_tilde_plus, 0.0, f_bottom);
    sol.phi11_inf = sol.phi21_inf + sol.sigma_tilde_plus / b1;

    // residual integrand must have decayed at the far end
    if (cfg.cross_terms) {
        const double fmax = std::max(std::abs(*std::max_element(tb.f.begin(), tb.f.end())),
                                     std::abs(*std::min_element(tb.f.begin(), tb.f.end())));
        const double f_end = std::max(std::abs(tb.f.front()), std::abs(tb.f.back()));
        if (fmax > 0.0 && f_end > 1e-8 * fmax)
            throw RegimeError("phase corrections: forcing term does not decay at the ends of the sigma grid");
    }

    const auto zero = model.config().cross_terms ? amplitude_corrections(model, sol.at(0.0).sigma)
                                                 : CorrectionState{};
    sol.g1_at_zero = cfg.a1 + zero.s1;
    sol.g2_at_zero = cfg.a2 + zero.s2;
    return sol;
}

inline InteractionSolution solve_interaction(const CollisionModel& model, const SolveOptions& opt = {})
{
    return phase_corrections(model, solve_sigma(model, opt));
}

/// The two-phase ansatz as a function of (t, x) for fixed epsilon.
class TwoSolitonAnsatz {
public:
    TwoSolitonAnsatz(const CollisionModel& model, const InteractionSolution& sol, double epsilon, bool clamp = false)
        : model_(&model), sol_(&sol), eps_(epsilon), clamp_(clamp)
    {
        require(epsilon > 0.0, "epsilon must be positive");
    }

    struct Frame {
        double g1, g2, phi1, phi2;
    };

    [[nodiscard]] double epsilon() const { return eps_; }
    [[nodiscard]] double tau(double t) const
    {
        const auto& g = model_->geometry();
        return g.psi_dot * (t - g.t_star) / eps_;
    }

    [[nodiscard]] Frame frame(double t) const
    {
        const auto& g = model_->geometry();
        const auto& c = model_->config();
        const auto p = sol_->at(tau(t), clamp_);
        return {c.a1 + p.s1, c.a2 + p.s2, g.v1 * t + c.x1_0 + eps_ * p.phi11, g.v2 * t + c.x2_0 + eps_ * p.phi21};
    }

    [[nodiscard]] double value(const Frame& f, double x) const
    {
        const auto& g = model_->geometry();
        return f.g1 * model_->profile1()(g.beta1 * (x - f.phi1) / eps_) +
               f.g2 * model_->profile2()(g.beta2 * (x - f.phi2) / eps_);
    }

    [[nodiscard]] double dx(const Frame& f, double x) const
    {
        const auto& g = model_->geometry();
        return f.g1 * g.beta1 / eps_ * model_->profile1().derivative(g.beta1 * (x - f.phi1) / eps_) +
               f.g2 * g.beta2 / eps_ * model_->profile2().derivative(g.beta2 * (x - f.phi2) / eps_);
    }

    [[nodiscard]] double operator()(double t, double x) const { return value(frame(t), x); }

    /// Time scale of the fastest variation (one unit of fast time).
    [[nodiscard]] double time_scale() const { return eps_ / model_->geometry().psi_dot; }

    /// Interval outside which u is below round-off at time t.
    [[nodiscard]] std::pair<double, double> support(double t) const
    {
        const auto f = frame(t);
        const auto& g = model_->geometry();
        const double w1 = eps_ * (model_->profile1().eta_max() + 10.0) / g.beta1;
        const double w2 = eps_ * (model_->profile2().eta_max() + 10.0) / g.beta2;
        return {std::min(f.phi1 - w1, f.phi2 - w2), std::max(f.phi1 + w1, f.phi2 + w2)};
    }

private:
    const CollisionModel* model_;
    const InteractionSolution* sol_;
    double eps_;
    bool clamp_;
};

/// Samples the ansatz at time t on a periodic grid.
inline WaveField assemble_ansatz(const CollisionModel& model, const InteractionSolution& sol, double epsilon,
                                 double t, double x0, double length, std::size_t n)
{
    TwoSolitonAnsatz ansatz(model, sol, epsilon);
    const auto fr = ansatz.frame(t);
    WaveField w;
    w.x0 = x0;
    w.length = length;
    w.epsilon = epsilon;
    w.t = t;
    w.u.resize(n);
    for (std::size_t j = 0; j < n; ++j) w.u[j] = ansatz.value(fr, w.x(j));
    return w;
}

} // namespace kdv
