#include <gtest/gtest.h>

#include <cmath>

#include "kdvlab/dynamics.hpp"

using namespace kdv;

namespace {

const Nonlinearity& three_halves()
{
    static const auto nl = Nonlinearity::homogeneous(1.5);
    return nl;
}

} // namespace

TEST(Dynamics, ForceVanishingAtZero)
{
    EXPECT_TRUE(vanishes_at_zero(LocalForce::zero()));
    EXPECT_TRUE(vanishes_at_zero(LocalForce::logistic(0.2, 1.0)));
    LocalForce shifted;
    shifted.value = [](double, double, double u) { return 1.0 - u; };
    EXPECT_FALSE(vanishes_at_zero(shifted));
    EXPECT_THROW(evolve_one_phase(three_halves(), shifted, 1.0, 0.0), ValidationError);
    EXPECT_THROW(LocalForce::logistic(-1.0, 1.0), ValidationError);
}

TEST(Dynamics, ForceMomentsOfLogisticForce)
{
    const auto nl = Nonlinearity::homogeneous(2.0);
    const auto p = solve_profile(nl, 1.0);
    const auto m = moments(nl, p);
    const double mu = 0.3, alpha = 2.0, a = 1.5;
    const auto fm = force_moments(p, a, LocalForce::logistic(mu, alpha), 0.0, 0.0);
    EXPECT_NEAR(fm.int_f0, mu * (alpha * a * m.a1 - a * a * m.a2), 1e-12);
    EXPECT_NEAR(fm.int_omega_f0, mu * (alpha * a * m.a2 - a * a * m.a3), 1e-12);
    EXPECT_DOUBLE_EQ(fm.f_bar, mu * (alpha - a) * a);
    EXPECT_TRUE(fm.normalized);
    const auto at_root = force_moments(p, alpha, LocalForce::logistic(mu, alpha), 0.0, 0.0);
    EXPECT_FALSE(at_root.normalized);
}

TEST(Dynamics, UnforcedSolitonKeepsAmplitude)
{
    OnePhaseOptions opt;
    opt.t_end = 5.0;
    opt.samples = 51;
    const auto tr = evolve_one_phase(three_halves(), LocalForce::zero(), 2.0, 1.0, opt);
    const double v = 2.0 * three_halves().g1(2.0);
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
        EXPECT_NEAR(tr.amplitude[k], 2.0, 1e-14);
        EXPECT_NEAR(tr.phi[k], 1.0 + v * tr.t[k], 1e-10);
    }
    EXPECT_EQ(tr.profile_solves, 1u);
}

TEST(Dynamics, LogisticAmplitudeLaw)
{
    const double mu = 0.2, alpha = 1.0;
    const auto force = LocalForce::logistic(mu, alpha);
    OnePhaseOptions opt;
    opt.t_end = 15.0;
    opt.samples = 151;
    for (double a0 : {3.0, 0.4}) {
        const auto tr = evolve_one_phase(three_halves(), force, a0, 0.0, opt);
        const auto law = logistic_reference(a0, mu, alpha, three_halves());
        EXPECT_NEAR(law.mu_prime, 8.0 * alpha * mu / 7.0, 1e-15);
        double err = 0.0;
        for (std::size_t k = 0; k < tr.t.size(); ++k) err = std::max(err, std::abs(tr.amplitude[k] - law(tr.t[k])));
        EXPECT_LT(err, 1e-6) << "A0 = " << a0;
    }
}

TEST(Dynamics, LogisticLawNeedsThreeHalves)
{
    EXPECT_THROW(logistic_reference(1.0, 0.2, 1.0, Nonlinearity::homogeneous(2.0)), ValidationError);
}

TEST(Dynamics, AmplitudeLeavingRangeIsRegimeError)
{
    OnePhaseOptions opt;
    opt.t_end = 50.0;
    opt.samples = 51;
    // A* grows with alpha and lies beyond u_max
    EXPECT_THROW(evolve_one_phase(three_halves(), LocalForce::logistic(0.5, 500.0), 1.0, 0.0, opt), RegimeError);
}

TEST(Dynamics, CriticalTimeEstimate)
{
    EXPECT_DOUBLE_EQ(critical_time_estimate(0.05, 0.2, 1.0), std::log(100.0) / 0.2);
    EXPECT_THROW(critical_time_estimate(0.0, 0.2, 1.0), ValidationError);
    EXPECT_THROW(critical_time_estimate(5.0, 0.5, 1.0), ValidationError);
}

TEST(Dynamics, TailGrowsAtLinearRate)
{
    const double mu = 0.1, alpha = 1.0;
    const auto force = LocalForce::logistic(mu, alpha);
    OnePhaseOptions opt;
    opt.t_end = 20.0;
    opt.samples = 401;
    const auto tr = evolve_one_phase(three_halves(), force, 1.0, 0.0, opt);
    const auto xs = num::linspace(0.5, 10.0, 20);
    TailOptions to;
    to.time_samples = 201;
    const auto tail = solve_tail(three_halves(), force, tr, xs, to);
    // u-(x, t) = u-(x, t_x) exp(alpha mu (t - t_x)) behind the soliton, zero ahead of it
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t k = 0; k < tail.t.size(); ++k) {
            const double t = tail.t[k];
            if (t <= tail.entry_time[i]) {
                EXPECT_EQ(tail.u[k][i], 0.0);
            } else {
                const double expect = tail.boundary_value[i] * std::exp(alpha * mu * (t - tail.entry_time[i]));
                EXPECT_NEAR(tail.u[k][i], expect, 1e-8 * std::max(1.0, std::abs(expect)));
            }
        }
    }
    const auto ct = critical_time(0.05, mu, alpha, tr, tail);
    EXPECT_NEAR(ct.growth_rate, alpha * mu, 0.1 * alpha * mu);
}

TEST(Dynamics, TailPointsMustBeCrossed)
{
    const auto force = LocalForce::logistic(0.1, 1.0);
    OnePhaseOptions opt;
    opt.t_end = 2.0;
    opt.samples = 41;
    const auto tr = evolve_one_phase(three_halves(), force, 1.0, 0.0, opt);
    EXPECT_THROW(solve_tail(three_halves(), force, tr, {-1.0}), ValidationError);
    EXPECT_THROW(solve_tail(three_halves(), force, tr, {1000.0}), ValidationError);
}
