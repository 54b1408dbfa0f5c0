// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "kdvlab/dynamics.hpp"
#include "kdvlab/interaction.hpp"
#include "kdvlab/pde.hpp"
#include "kdvlab/profile.hpp"
#include "kdvlab/validation.hpp"

using namespace kdv;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

InteractionConfig pair_config(double a1, double a2, double x1 = 1.0, double x2 = 0.0)
{
    InteractionConfig c;
    c.a1 = a1;
    c.a2 = a2;
    c.x1_0 = x1;
    c.x2_0 = x2;
    return c;
}

// frozen oracle: moments of sech^2(eta/2) by tanh-sinh quadrature on the half line
double sech_moment(int power, bool derivative)
{
    boost::math::quadrature::tanh_sinh<double> q;
    auto f = [&](double e) {
        const double s = 1.0 / std::cosh(0.5 * e);
        if (derivative) {
            const double d = -s * s * std::tanh(0.5 * e);
            return d * d;
        }
        return std::pow(s * s, power);
    };
    return 2.0 * q.integrate(f, 0.0, std::numeric_limits<double>::infinity());
}

Outcome profile_oracle()
{
    double worst = 0.0;
    for (double kappa : {1.5, 2.0, 3.0}) {
        const auto nl = Nonlinearity::homogeneous(kappa);
        const auto exact = power_law_profile(kappa);
        for (double a : {1.0, 4.0}) {
            const auto p = solve_profile(nl, a);
            for (std::size_t j = 0; j < p.eta().size(); ++j)
                if (std::abs(p.eta()[j]) <= 30.0) worst = std::max(worst, std::abs(p.omega()[j] - exact.omega()[j]));
        }
    }
    return {worst <= 1e-8, "max |omega - closed form| = " + fmt(worst)};
}

Outcome moment_identities()
{
    std::mt19937_64 rng(20240501);
    double worst = 0.0;
    for (int s = 0; s < 20; ++s) {
        const auto nl = random_power_sum(rng);
        for (double a : {0.5, 1.0, 5.0, 50.0})
            worst = std::max(worst, identity_residuals(nl, a, moments(nl, solve_profile(nl, a))).max_relative());
    }
    return {worst <= 1e-6, "20 nonlinearities x 4 amplitudes, worst relative residual " + fmt(worst)};
}

Outcome kdv_moments()
{
    const double ref[4] = {sech_moment(1, false), sech_moment(2, false), sech_moment(3, false), sech_moment(0, true)};
    const auto nl = Nonlinearity::homogeneous(2.0);
    double worst = 0.0;
    for (double a : {1.0, 4.0}) {
        const auto m = moments(nl, solve_profile(nl, a));
        const double got[4] = {m.a1, m.a2, m.a3, m.a2_prime};
        for (int k = 0; k < 4; ++k) worst = std::max(worst, std::abs(got[k] - ref[k]));
    }
    return {worst <= 1e-8, "max deviation from quadrature oracle " + fmt(worst)};
}

Outcome functional_equation()
{
    const CollisionModel model(Nonlinearity::homogeneous(2.0), pair_config(1.0, 10.0));
    const auto traj = solve_sigma(model);
    double eq1 = 0.0, link = 0.0;
    for (double s : traj.table.sigma) {
        const auto st = amplitude_corrections(model, s);
        eq1 = std::max(eq1, std::abs(st.eq1_residual));
        link = std::max(link, std::abs(st.kappa2 + model.abar1() * st.kappa1));
    }
    std::ostringstream os;
    os << traj.table.sigma.size() << " sigma nodes, max first-balance residual " << fmt(eq1)
       << ", max |kappa2 + abar1 kappa1| " << fmt(link);
    return {eq1 <= 1e-12 && link <= 1e-10, os.str()};
}

Outcome leading_term_order()
{
    // g'(u) = u^3: theta = A1/A2 and q' = 1, so the expected order is 2
    const auto nl = Nonlinearity::homogeneous(3.0);
    const double a2 = 20.0;
    std::vector<double> th, dev;
    double expected = 0.0;
    for (double t : {0.2, 0.1, 0.05}) {
        const CollisionModel m(nl, pair_config(t * a2, a2));
        expected = std::min(2.0, 2.0 * m.geometry().q_prime);
        double d = 0.0;
        for (double s = -20.0; s <= 20.0; s += 0.25) {
            const auto st = amplitude_corrections(m, s);
            d = std::max(d, std::abs(st.kappa1 - m.kappa1_leading(st.conv.r0)));
        }
        th.push_back(m.geometry().theta);
        dev.push_back(d);
    }
    const double order = num::fitted_order(th, dev);
    std::ostringstream os;
    os << "deviations " << fmt(dev[0]) << ", " << fmt(dev[1]) << ", " << fmt(dev[2]) << "; order " << fmt(order)
       << " (expected " << fmt(expected) << ")";
    return {std::abs(order - expected) <= 0.3, os.str()};
}

// exponential rate of |y - y_inf| against |tau| over the samples above a round-off floor
double decay_rate(const std::vector<double>& tau, const std::vector<double>& y, double y_inf, bool right)
{
    std::vector<double> xs, ls;
    for (std::size_t k = 0; k < tau.size(); ++k) {
        if ((tau[k] > 0.0) != right) continue;
        const double d = std::abs(y[k] - y_inf);
        if (d > 1e-10 && d < 1e-3) {
            xs.push_back(std::abs(tau[k]));
            ls.push_back(std::log(d));
        }
    }
    if (xs.size() < 5) return std::numeric_limits<double>::quiet_NaN();
    return -num::fit_line(xs, ls).slope;
}

Outcome sigma_dynamics()
{
    const CollisionModel model(Nonlinearity::homogeneous(2.0), pair_config(4.0, 50.0));
    const auto traj = solve_sigma(model);
    const auto sol = phase_corrections(model, traj);
    const double left = decay_rate(sol.tau, sol.sigma_tilde, sol.sigma_tilde_minus, false);
    const double right = decay_rate(sol.tau, sol.sigma_tilde, sol.sigma_tilde_plus, true);
    double bound = 0.0;
    for (double v : sol.sigma_tilde) bound = std::max(bound, std::abs(v));
    std::ostringstream os;
    os << "theta " << fmt(model.geometry().theta) << ", decay rates " << fmt(left) << " / " << fmt(right)
       << ", max |sigma~| " << fmt(bound) << ", min forcing " << fmt(sol.min_forcing);
    return {left > 0.0 && right > 0.0 && sol.min_forcing > 0.0 && std::isfinite(bound), os.str()};
}

Outcome weak_residual_orders()
{
    const auto nl = Nonlinearity::homogeneous(2.0);
    const CollisionModel model(nl, pair_config(1.0, 10.0));
    const auto sol = solve_interaction(model);
    const auto psis = collision_test_functions(model.geometry().x_star, 10.0);
    std::vector<WeakResidualReport> res;
    std::vector<BalanceReport> bal;
    for (double eps : {0.1, 0.05, 0.025}) {
        const auto fam = ansatz_family(model, sol, eps);
        const auto tg = interaction_time_grid(model, eps);
        res.push_back(weak_residual(fam, nl, psis, tg));
        bal.push_back(balance_laws(fam, nl, tg));
    }
    const auto of = residual_orders(res);
    const auto bo = balance_orders(bal);
    auto in_band = [](double p) { return p >= 1.8 && p <= 2.2; };
    bool ok_lin = true, ok_quad = true, okb = true;
    for (double p : of.linear) ok_lin = ok_lin && in_band(p);
    for (double p : of.quadratic) ok_quad = ok_quad && in_band(p);
    for (double p : bo) okb = okb && in_band(p);
    std::ostringstream os;
    os << "linear orders [" << fmt(*std::min_element(of.linear.begin(), of.linear.end())) << ", "
       << fmt(*std::max_element(of.linear.begin(), of.linear.end())) << "], quadratic orders ["
       << fmt(*std::min_element(of.quadratic.begin(), of.quadratic.end())) << ", "
       << fmt(*std::max_element(of.quadratic.begin(), of.quadratic.end())) << "]; law drift orders";
    for (double p : bo) os << ' ' << fmt(p);
    os << " with relative drifts at eps=0.1:";
    for (std::size_t l = 0; l < 4; ++l) os << ' ' << fmt(bal[0].max_drift[l] / std::max(bal[0].scale[l], 1e-300));
    return {ok_lin && ok_quad && okb, os.str()};
}

Outcome single_soliton()
{
    const auto nl = Nonlinearity::homogeneous(2.0);
    const auto p = solve_profile(nl, 1.0);
    const double eps = 0.05, length = 20.0;
    const auto init = soliton_field(p, 0.0, eps, -10.0, length, 4096);
    SolverConfig cfg;
    cfg.t_end = length / p.speed();
    const auto tr = evolve(init, nl, cfg);
    const auto start = extract_solitons(init, 0.5), end = extract_solitons(tr.snapshots.back(), 0.5);
    if (start.size() != 1 || end.size() != 1) return {false, "soliton not tracked"};
    double d = end[0].position - start[0].position;
    d -= length * std::round(d / length);
    const double speed = (length + d) / cfg.t_end;
    const double speed_err = std::abs(speed / p.speed() - 1.0);
    const double amp_err = std::abs(end[0].amplitude - 1.0);
    const double mass_drift = std::abs(tr.mass.back() / tr.mass.front() - 1.0);
    const double mom_drift = std::abs(tr.momentum.back() / tr.momentum.front() - 1.0);
    std::ostringstream os;
    os << tr.steps << " steps, amplitude drift " << fmt(amp_err) << ", speed error " << fmt(speed_err)
       << ", mass drift " << fmt(mass_drift) << ", momentum drift " << fmt(mom_drift);
    return {amp_err <= 1e-3 && speed_err <= 1e-3 && mass_drift <= 1e-10, os.str()};
}

Outcome elastic_collision()
{
    const auto nl = Nonlinearity::homogeneous(2.0);
    const double eps = 0.05;
    CompareOptions opt;
    opt.length = 20.0;
    opt.x0 = -5.0;
    opt.n_points = 4096;
    opt.checkpoints = {8.0};
    const auto rep = compare_pde_ansatz(nl, pair_config(1.0, 2.0, 4.0, 2.0), eps, opt);
    const bool amps = rep.amplitude_error1 <= 2.0 * eps && rep.amplitude_error2 <= 2.0 * eps;
    const bool signs = rep.pde_shift2 > 0.0 && rep.pde_shift1 < 0.0;
    bool model_signs = true;
    if (rep.model_status == "ok") model_signs = rep.model_shift2 > 0.0 && rep.model_shift1 < 0.0;
    std::ostringstream os;
    os << "amplitude errors " << fmt(rep.amplitude_error1) << " / " << fmt(rep.amplitude_error2) << ", shifts "
       << fmt(rep.pde_shift1) << " / " << fmt(rep.pde_shift2) << ", mass drift " << fmt(rep.mass_drift) << "; ";
    if (rep.model_status == "ok")
        os << "model shifts " << fmt(rep.model_shift1) << " / " << fmt(rep.model_shift2);
    else
        os << rep.model_status;
    return {amps && signs && model_signs, os.str()};
}

const Nonlinearity& three_halves()
{
    static const auto nl = Nonlinearity::homogeneous(1.5);
    return nl;
}

Outcome logistic_law()
{
    const double mu = 0.2, alpha = 1.0;
    const auto force = LocalForce::logistic(mu, alpha);
    OnePhaseOptions opt;
    opt.t_end = 20.0;
    opt.samples = 401;
    double worst = 0.0, a_star = 0.0;
    bool monotone = true;
    for (double a0 : {4.0, 0.25}) {
        const auto law = logistic_reference(a0, mu, alpha, three_halves());
        a_star = law.a_star;
        const auto tr = evolve_one_phase(three_halves(), force, a0, 0.0, opt);
        for (std::size_t k = 0; k < tr.t.size(); ++k) {
            worst = std::max(worst, std::abs(tr.amplitude[k] / law(tr.t[k]) - 1.0));
            if (k > 0) {
                const double step = tr.amplitude[k] - tr.amplitude[k - 1];
                monotone = monotone && (a0 > a_star ? step <= 0.0 : step >= 0.0);
            }
        }
    }
    std::ostringstream os;
    os << "A* = " << fmt(a_star) << ", worst relative deviation " << fmt(worst)
       << (monotone ? ", both regimes monotone" : ", monotonicity violated");
    return {worst <= 1e-6 && monotone, os.str()};
}

Outcome tail_instability()
{
    const double alpha = 1.0;
    bool ok = true;
    std::ostringstream os;
    for (double eps : {0.05, 0.1}) {
        for (double mu : {0.1, 0.2}) {
            const auto force = LocalForce::logistic(mu, alpha);
            const double est = critical_time_estimate(eps, mu, alpha);
            OnePhaseOptions opt;
            opt.t_end = 2.5 * est;
            opt.samples = 2001;
            const auto tr = evolve_one_phase(three_halves(), force, 1.0, 0.0, opt);
            auto xs = num::linspace(tr.phi.front(), tr.phi.back(), 201);
            xs.erase(xs.begin());
            TailOptions to;
            to.time_samples = 1001;
            to.epsilon = eps;
            const auto tail = solve_tail(three_halves(), force, tr, xs, to);
            const auto ct = critical_time(eps, mu, alpha, tr, tail);
            const bool rate_ok = std::abs(ct.growth_rate / (alpha * mu) - 1.0) <= 0.1;
            const bool time_ok = std::isfinite(ct.measured) && ct.measured >= 0.5 * est && ct.measured <= 2.0 * est;
            ok = ok && rate_ok && time_ok;
            os << "(eps " << eps << ", mu " << mu << "): rate " << fmt(ct.growth_rate) << ", T " << fmt(ct.measured)
               << " vs " << fmt(est) << "; ";
        }
    }
    return {ok, os.str()};
}

Outcome interaction_suppression()
{
    const double mu = 0.2, alpha = 1.0;
    const auto force = LocalForce::logistic(mu, alpha);
    const auto law = logistic_reference(1.0, mu, alpha, three_halves());
    OnePhaseOptions opt;
    opt.t_end = 60.0;
    opt.samples = 601;
    std::vector<PerturbedTrajectory> runs;
    for (double a0 : {4.0, 2.0, 1.0, 0.5, 0.25}) runs.push_back(evolve_one_phase(three_halves(), force, a0, 0.0, opt));

    double final_dev = 0.0;
    for (const auto& r : runs) final_dev = std::max(final_dev, std::abs(r.amplitude.back() / law.a_star - 1.0));
    // transient: one e-folding of the logistic law
    const double transient = 1.0 / law.mu_prime;
    double last_growth = 0.0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        for (std::size_t j = i + 1; j < runs.size(); ++j) {
            for (std::size_t k = 1; k < runs[i].t.size(); ++k) {
                const double g0 = std::abs(runs[i].beta[k - 1] * runs[i].beta[k - 1] - runs[j].beta[k - 1] * runs[j].beta[k - 1]);
                const double g1 = std::abs(runs[i].beta[k] * runs[i].beta[k] - runs[j].beta[k] * runs[j].beta[k]);
                if (g1 > g0 * (1.0 + 1e-12) + 1e-15) last_growth = std::max(last_growth, runs[i].t[k]);
            }
        }
    }
    std::ostringstream os;
    os << "A* = " << fmt(law.a_star) << ", final max relative deviation " << fmt(final_dev)
       << ", last pairwise gap increase at t = " << fmt(last_growth) << " (transient " << fmt(transient) << ")";
    return {final_dev <= 1e-3 && last_growth <= transient, os.str()};
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"profile closed form", profile_oracle},
        {"moment identities", moment_identities},
        {"KdV moments", kdv_moments},
        {"functional equation", functional_equation},
        {"leading-term order", leading_term_order},
        {"sigma dynamics", sigma_dynamics},
        {"weak residual order", weak_residual_orders},
        {"single soliton", single_soliton},
        {"elastic collision", elastic_collision},
        {"logistic law", logistic_law},
        {"tail instability", tail_instability},
        {"interaction suppression", interaction_suppression},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.pass) ++failed;
        std::printf("%s %2zu %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
