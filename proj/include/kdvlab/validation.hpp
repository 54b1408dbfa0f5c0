#pragma once

// Weak residuals, integral balance laws and PDE-versus-ansatz comparison.
//
// For a family u(t, x) and a test function psi the residuals are
//   R_lin = d/dt int u psi - int g'(u) psi' - int F psi,
//   R_quad = d/dt int u^2 psi + int {2 g2(u) + 3 (eps u_x)^2} psi' - 2 int F u psi.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "kdvlab/dynamics.hpp"
#include "kdvlab/error.hpp"
#include "kdvlab/interaction.hpp"
#include "kdvlab/nonlinearity.hpp"
#include "kdvlab/numerics.hpp"
#include "kdvlab/pde.hpp"
#include "kdvlab/profile.hpp"

namespace kdv {

/// psi(x) = P(s) exp(1 - 1/(1 - s^2)), s = (x - center)/half_width, zero for |s| >= 1.
struct TestFunction {
    double center = 0.0;
    double half_width = 1.0;
    std::vector<double> poly{1.0};  // P(s) = sum poly[k] s^k

    [[nodiscard]] double lower() const { return center - half_width; }
    [[nodiscard]] double upper() const { return center + half_width; }

    [[nodiscard]] double operator()(double x) const
    {
        const double s = (x - center) / half_width;
        if (std::abs(s) >= 1.0) return 0.0;
        return p(s) * bump(s);
    }

    [[nodiscard]] double derivative(double x) const
    {
        const double s = (x - center) / half_width;
        if (std::abs(s) >= 1.0) return 0.0;
        const double q = 1.0 - s * s;
        const double b = bump(s);
        return (dp(s) * b - p(s) * b * 2.0 * s / (q * q)) / half_width;
    }

private:
    [[nodiscard]] double p(double s) const
    {
        double r = 0.0;
        for (std::size_t k = poly.size(); k-- > 0;) r = r * s + poly[k];
        return r;
    }
    [[nodiscard]] double dp(double s) const
    {
        double r = 0.0;
        for (std::size_t k = poly.size(); k-- > 1;) r = r * s + static_cast<double>(k) * poly[k];
        return r;
    }
    static double bump(double s) { return std::exp(1.0 - 1.0 / (1.0 - s * s)); }
};

using TestFunctionSet = std::vector<TestFunction>;

/// Seven bumps whose supports all contain x_star, placed at |s| <= 0.35 so the
/// interaction layer is seen by every test function; three base widths.
inline TestFunctionSet collision_test_functions(double x_star, double scale = 1.0)
{
    require(scale > 0.0, "test function scale must be positive");
    struct Spec {
        double offset, width;
        std::vector<double> poly;
    };
    const std::vector<Spec> specs{
        {0.0, 1.0, {1.0}},
        {-0.3, 1.0, {1.0, 0.5}},
        {0.3, 2.0, {1.0}},
        {0.15, 2.0, {1.0, -0.4, 0.3}},
        {-0.2, 3.0, {1.0, 0.8}},
        {0.35, 3.0, {0.5, 0.0, 1.0}},
        {-0.35, 2.0, {1.0, 0.3, -0.2}},
    };
    TestFunctionSet set;
    for (const auto& s : specs) {
        const double w = s.width * scale;
        set.push_back({x_star - s.offset * w, w, s.poly});
    }
    return set;
}

/// Evaluates u and u_x of a family at one time on a set of points.
struct FieldFamily {
    double epsilon = 0.0;
    std::function<void(double t, const std::vector<double>& x, std::vector<double>& u, std::vector<double>& ux)> sample;
    std::function<std::pair<double, double>(double t)> support;  // interval carrying the field
    double min_width = 0.0;                                       // narrowest structure, sets the x spacing
    double time_scale = 1.0;                                      // fastest time variation
};

inline FieldFamily soliton_family(const SolitonProfile& p, double epsilon, double x0)
{
    require(epsilon > 0.0, "epsilon must be positive");
    FieldFamily f;
    f.epsilon = epsilon;
    auto prof = std::make_shared<SolitonProfile>(p);
    f.sample = [prof, epsilon, x0](double t, const std::vector<double>& x, std::vector<double>& u, std::vector<double>& ux) {
        const double a = prof->amplitude(), b = prof->beta(), c = x0 + prof->speed() * t;
        u.resize(x.size());
        ux.resize(x.size());
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double eta = b * (x[j] - c) / epsilon;
            u[j] = a * (*prof)(eta);
            ux[j] = a * b / epsilon * prof->derivative(eta);
        }
    };
    f.support = [prof, epsilon, x0](double t) {
        const double c = x0 + prof->speed() * t, w = epsilon * (prof->eta_max() + 10.0) / prof->beta();
        return std::make_pair(c - w, c + w);
    };
    f.min_width = epsilon / p.beta();
    f.time_scale = epsilon / (p.beta() * p.speed());
    return f;
}

/// The two-phase ansatz as a family; model and solution must outlive the family.
inline FieldFamily ansatz_family(const CollisionModel& model, const InteractionSolution& sol, double epsilon)
{
    auto ans = std::make_shared<TwoSolitonAnsatz>(model, sol, epsilon, true);
    FieldFamily f;
    f.epsilon = epsilon;
    f.sample = [ans](double t, const std::vector<double>& x, std::vector<double>& u, std::vector<double>& ux) {
        const auto fr = ans->frame(t);
        u.resize(x.size());
        ux.resize(x.size());
        for (std::size_t j = 0; j < x.size(); ++j) {
            u[j] = ans->value(fr, x[j]);
            ux[j] = ans->dx(fr, x[j]);
        }
    };
    f.support = [ans](double t) { return ans->support(t); };
    f.min_width = epsilon / model.geometry().beta2;
    f.time_scale = ans->time_scale();
    return f;
}

struct ResidualOptions {
    double x_resolution = 20.0;  // points per narrowest width
    double t_step = 0.0;         // stencil step; 0: 0.02 * time_scale
    const LocalForce* force = nullptr;
};

struct WeakResidualReport {
    double epsilon = 0.0;
    std::vector<double> t;
    std::vector<std::vector<double>> linear, quadratic;  // [psi][t]
    std::vector<double> max_linear, max_quadratic;       // max over t per psi
};

namespace detail {

inline double five_point(double fm2, double fm1, double fp1, double fp2, double h)
{
    return (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
}

inline std::vector<double> uniform_nodes(double a, double b, double h)
{
    const auto n = static_cast<std::size_t>(std::ceil((b - a) / h)) + 1;
    return num::linspace(a, b, std::max<std::size_t>(n, 3));
}

} // namespace detail

inline WeakResidualReport weak_residual(const FieldFamily& fam, const Nonlinearity& nl, const TestFunctionSet& psis,
                                        const std::vector<double>& t_grid, const ResidualOptions& opt = {})
{
    require(fam.sample != nullptr, "weak residual: family has no sampler");
    require(fam.min_width > 0.0 && opt.x_resolution >= 4.0, "weak residual: spacing must resolve the epsilon scale");
    const double hx = fam.min_width / opt.x_resolution;
    const double ht = opt.t_step > 0.0 ? opt.t_step : 0.02 * fam.time_scale;
    const double eps = fam.epsilon;

    WeakResidualReport rep;
    rep.epsilon = eps;
    rep.t = t_grid;
    std::vector<double> u, ux, w(0);
    for (const auto& psi : psis) {
        const auto x = detail::uniform_nodes(psi.lower(), psi.upper(), hx);
        const double h = x[1] - x[0];
        std::vector<double> pv(x.size()), pd(x.size());
        for (std::size_t j = 0; j < x.size(); ++j) {
            pv[j] = psi(x[j]);
            pd[j] = psi.derivative(x[j]);
        }
        // psi and its derivatives vanish at both ends: plain sums are spectrally accurate
        auto moments = [&](double t, double& m1, double& m2) {
            fam.sample(t, x, u, ux);
            m1 = m2 = 0.0;
            for (std::size_t j = 0; j < x.size(); ++j) {
                m1 += u[j] * pv[j];
                m2 += u[j] * u[j] * pv[j];
            }
            m1 *= h;
            m2 *= h;
        };
        std::vector<double> rl, rq;
        for (double t : t_grid) {
            double a[4], b[4];
            const double offs[4] = {-2.0, -1.0, 1.0, 2.0};
            for (int k = 0; k < 4; ++k) moments(t + offs[k] * ht, a[k], b[k]);
            const double d1 = detail::five_point(a[0], a[1], a[2], a[3], ht);
            const double d2 = detail::five_point(b[0], b[1], b[2], b[3], ht);
            fam.sample(t, x, u, ux);
            double jl = 0.0, jq = 0.0, fl = 0.0, fq = 0.0;
            for (std::size_t j = 0; j < x.size(); ++j) {
                const double v = std::max(u[j], 0.0);
                jl += nl.g_prime(v) * pd[j];
                jq += (2.0 * nl.g2(v) + 3.0 * eps * eps * ux[j] * ux[j]) * pd[j];
                if (opt.force != nullptr) {
                    const double fv = (*opt.force)(x[j], t, u[j]);
                    fl += fv * pv[j];
                    fq += fv * u[j] * pv[j];
                }
            }
            rl.push_back(d1 - h * jl - h * fl);
            rq.push_back(d2 + h * jq - 2.0 * h * fq);
        }
        double ml = 0.0, mq = 0.0;
        for (std::size_t k = 0; k < rl.size(); ++k) {
            ml = std::max(ml, std::abs(rl[k]));
            mq = std::max(mq, std::abs(rq[k]));
        }
        rep.linear.push_back(std::move(rl));
        rep.quadratic.push_back(std::move(rq));
        rep.max_linear.push_back(ml);
        rep.max_quadratic.push_back(mq);
    }
    return rep;
}

/// Residual time grid: n points across t* +- half_window eps / psi_dot.
inline std::vector<double> interaction_time_grid(const CollisionModel& model, double epsilon, std::size_t n = 41,
                                                 double half_window = 10.0)
{
    const auto& g = model.geometry();
    const double w = half_window * epsilon / g.psi_dot;
    return num::linspace(g.t_star - w, g.t_star + w, n);
}

/// The four integral laws: d/dt int u, d/dt int u^2, d/dt int x u - int g'(u),
/// d/dt int x u^2 + 2 int g2(u) + 3 int (eps u_x)^2.
struct BalanceReport {
    double epsilon = 0.0;
    std::vector<double> t;
    std::vector<std::vector<double>> drift;  // [law][t]
    std::vector<double> max_drift;           // per law
    std::vector<double> scale;               // magnitude of the largest term per law
};

inline BalanceReport balance_laws(const FieldFamily& fam, const Nonlinearity& nl, const std::vector<double>& t_grid,
                                  const ResidualOptions& opt = {})
{
    require(fam.sample != nullptr && fam.support != nullptr, "balance laws: family needs sampler and support");
    const double hx_target = fam.min_width / opt.x_resolution;
    const double ht = opt.t_step > 0.0 ? opt.t_step : 0.02 * fam.time_scale;
    const double eps = fam.epsilon;

    BalanceReport rep;
    rep.epsilon = eps;
    rep.t = t_grid;
    rep.drift.assign(4, {});
    rep.max_drift.assign(4, 0.0);
    rep.scale.assign(4, 0.0);
    std::vector<double> u, ux;
    for (double t : t_grid) {
        // one x grid covering the field over the whole stencil
        auto lo = fam.support(t - 2.0 * ht), hi = fam.support(t + 2.0 * ht);
        const double a = std::min(lo.first, hi.first), b = std::max(lo.second, hi.second);
        const auto x = detail::uniform_nodes(a, b, hx_target);
        const double h = x[1] - x[0];
        auto integrals = [&](double tt, double out[4]) {
            fam.sample(tt, x, u, ux);
            for (int k = 0; k < 4; ++k) out[k] = 0.0;
            for (std::size_t j = 0; j < x.size(); ++j) {
                out[0] += u[j];
                out[1] += u[j] * u[j];
                out[2] += x[j] * u[j];
                out[3] += x[j] * u[j] * u[j];
            }
            for (int k = 0; k < 4; ++k) out[k] *= h;
        };
        double s[4][4];
        const double offs[4] = {-2.0, -1.0, 1.0, 2.0};
        for (int k = 0; k < 4; ++k) integrals(t + offs[k] * ht, s[k]);
        double d[4];
        for (int law = 0; law < 4; ++law) d[law] = detail::five_point(s[0][law], s[1][law], s[2][law], s[3][law], ht);
        fam.sample(t, x, u, ux);
        double gp = 0.0, rest = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double v = std::max(u[j], 0.0);
            gp += nl.g_prime(v);
            rest += 2.0 * nl.g2(v) + 3.0 * eps * eps * ux[j] * ux[j];
        }
        gp *= h;
        rest *= h;
        const double vals[4] = {d[0], d[1], d[2] - gp, d[3] + rest};
        const double mags[4] = {std::abs(s[1][0]) / fam.time_scale, std::abs(s[1][1]) / fam.time_scale,
                                std::abs(gp), std::abs(rest)};
        for (int law = 0; law < 4; ++law) {
            rep.drift[static_cast<std::size_t>(law)].push_back(vals[law]);
            rep.max_drift[static_cast<std::size_t>(law)] =
                std::max(rep.max_drift[static_cast<std::size_t>(law)], std::abs(vals[law]));
            rep.scale[static_cast<std::size_t>(law)] = std::max(rep.scale[static_cast<std::size_t>(law)], mags[law]);
        }
    }
    return rep;
}

/// Least-squares order of max residuals against epsilon, per test function.
struct OrderFit {
    std::vector<double> linear, quadratic;
};

inline OrderFit residual_orders(const std::vector<WeakResidualReport>& reps)
{
    require(reps.size() >= 3, "order fit needs at least three epsilon values");
    OrderFit fit;
    std::vector<double> eps;
    for (const auto& r : reps) eps.push_back(r.epsilon);
    const std::size_t npsi = reps.front().max_linear.size();
    for (std::size_t j = 0; j < npsi; ++j) {
        std::vector<double> yl, yq;
        for (const auto& r : reps) {
            yl.push_back(r.max_linear[j]);
            yq.push_back(r.max_quadratic[j]);
        }
        fit.linear.push_back(num::fitted_order(eps, yl));
        fit.quadratic.push_back(num::fitted_order(eps, yq));
    }
    return fit;
}

inline std::vector<double> balance_orders(const std::vector<BalanceReport>& reps)
{
    require(reps.size() >= 3, "order fit needs at least three epsilon values");
    std::vector<double> eps, out;
    for (const auto& r : reps) eps.push_back(r.epsilon);
    for (std::size_t law = 0; law < 4; ++law) {
        std::vector<double> y;
        for (const auto& r : reps) y.push_back(std::max(r.max_drift[law], std::numeric_limits<double>::min()));
        out.push_back(num::fitted_order(eps, y));
    }
    return out;
}

/// Random admissible power sum with one to three terms: exponents in (0.2, 3.5),
/// positive coefficients except possibly a small negative middle one, redrawn until admissible.
inline Nonlinearity random_power_sum(std::mt19937_64& rng, double u_max = 100.0)
{
    std::uniform_int_distribution<int> count(1, 3);
    std::uniform_real_distribution<double> expo(0.2, 3.5), coef(0.1, 2.0), unit(0.0, 1.0);
    for (;;) {
        const int n = count(rng);
        std::vector<double> q(static_cast<std::size_t>(n));
        for (auto& v : q) v = expo(rng);
        std::sort(q.begin(), q.end());
        if (std::adjacent_find(q.begin(), q.end(), [](double a, double b) { return b - a < 0.05; }) != q.end())
            continue;
        std::vector<PowerTerm> terms;
        for (int k = 0; k < n; ++k) terms.push_back({coef(rng), q[static_cast<std::size_t>(k)]});
        if (n == 3 && unit(rng) < 0.3) terms[1].coefficient *= -0.05;
        if (validate_terms(terms, u_max).admissible()) return Nonlinearity::power_sum(terms, u_max);
    }
}

// ---------------------------------------------------------------------------
// PDE versus ansatz

struct CompareOptions {
    double length = 20.0;
    double x0 = 0.0;
    std::size_t n_points = 4096;
    std::vector<double> checkpoints;  // must include a post-collision time last
    SolverConfig solver{};
};

struct Checkpoint {
    double t = 0.0;
    bool merged = false;  // fewer than two peaks resolved
    std::vector<Peak> pde;
    std::optional<TwoSolitonAnsatz::Frame> ansatz;
};

struct ComparisonReport {
    std::vector<Checkpoint> checkpoints;
    double amplitude_error1 = 0.0, amplitude_error2 = 0.0;  // relative, last checkpoint
    double pde_shift1 = 0.0, pde_shift2 = 0.0;              // measured position minus free trajectory
    double model_shift1 = std::numeric_limits<double>::quiet_NaN();  // eps phi_{i1}(+inf)
    double model_shift2 = std::numeric_limits<double>::quiet_NaN();
    std::string model_status = "ok";
    double mass_drift = 0.0;
};

inline WaveField two_soliton_field(const SolitonProfile& p1, double x1, const SolitonProfile& p2, double x2,
                                   double epsilon, double x0, double length, std::size_t n)
{
    auto w = soliton_field(p1, x1, epsilon, x0, length, n);
    const auto w2 = soliton_field(p2, x2, epsilon, x0, length, n);
    for (std::size_t j = 0; j < n; ++j) w.u[j] += w2.u[j];
    return w;
}

/// Runs the PDE from two separated solitons and compares with the model where it exists.
inline ComparisonReport compare_pde_ansatz(const Nonlinearity& nl, const InteractionConfig& cfg, double epsilon,
                                           const CompareOptions& opt)
{
    require(!opt.checkpoints.empty(), "comparison needs checkpoints");
    const auto geo = collision_geometry(nl, cfg);
    ComparisonReport rep;

    std::optional<CollisionModel> model;
    std::optional<InteractionSolution> sol;
    try {
        model.emplace(nl, cfg);
        sol = solve_interaction(*model);
        rep.model_shift1 = epsilon * sol->phi11_inf;
        rep.model_shift2 = epsilon * sol->phi21_inf;
    } catch (const RegimeError& e) {
        rep.model_status = std::string("model unavailable: ") + e.what();
        sol.reset();
    }

    const auto p1 = solve_profile(nl, cfg.a1, cfg.grid);
    const auto p2 = solve_profile(nl, cfg.a2, cfg.grid);
    const auto init = two_soliton_field(p1, cfg.x1_0, p2, cfg.x2_0, epsilon, opt.x0, opt.length, opt.n_points);
    auto scfg = opt.solver;
    scfg.snapshot_times = opt.checkpoints;
    scfg.t_end = *std::max_element(opt.checkpoints.begin(), opt.checkpoints.end());
    const auto traj = evolve(init, nl, scfg);
    rep.mass_drift = std::abs(traj.mass.back() / traj.mass.front() - 1.0);

    std::optional<TwoSolitonAnsatz> ans;
    if (sol) ans.emplace(*model, *sol, epsilon, true);
    const double threshold = 0.5 * cfg.a1;
    for (const auto& snap : traj.snapshots) {
        if (snap.t == 0.0 && std::find(opt.checkpoints.begin(), opt.checkpoints.end(), 0.0) == opt.checkpoints.end())
            continue;
        Checkpoint c;
        c.t = snap.t;
        c.pde = extract_solitons(snap, threshold);
        c.merged = c.pde.size() < 2;
        if (ans) c.ansatz = ans->frame(snap.t);
        rep.checkpoints.push_back(std::move(c));
    }

    const auto& last = rep.checkpoints.back();
    if (last.merged) throw RegimeError("comparison: solitons not separated at the last checkpoint");
    // the two largest peaks; the taller one is the fast soliton
    auto peaks = last.pde;
    std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.amplitude > b.amplitude; });
    const Peak big = peaks[0], small = peaks[1];
    rep.amplitude_error1 = std::abs(small.amplitude / cfg.a1 - 1.0);
    rep.amplitude_error2 = std::abs(big.amplitude / cfg.a2 - 1.0);
    auto unwrap = [&](double measured, double free) {
        double d = measured - free;
        d -= opt.length * std::round(d / opt.length);
        return d;
    };
    rep.pde_shift1 = unwrap(small.position, cfg.x1_0 + geo.v1 * last.t);
    rep.pde_shift2 = unwrap(big.position, cfg.x2_0 + geo.v2 * last.t);
    return rep;
}

} // namespace kdv
