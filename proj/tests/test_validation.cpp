#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kdvlab/validation.hpp"

using namespace kdv;

namespace {

double third_derivative(const TestFunction& psi, double x)
{
    const double h = 1e-3;
    return (psi.derivative(x + h) - 2.0 * psi.derivative(x) + psi.derivative(x - h)) / (h * h);
}

} // namespace

TEST(TestFunctions, CompactSupportAndDerivative)
{
    const TestFunction psi{2.0, 1.5, {1.0, -0.4, 0.3}};
    EXPECT_EQ(psi(psi.lower()), 0.0);
    EXPECT_EQ(psi(psi.upper() + 0.1), 0.0);
    EXPECT_EQ(psi.derivative(psi.lower() - 1.0), 0.0);
    EXPECT_DOUBLE_EQ(psi(2.0), 1.0);
    for (double x : {0.7, 1.2, 2.0, 2.9, 3.4}) {
        const double h = 1e-5;
        const double fd = (psi(x + h) - psi(x - h)) / (2.0 * h);
        EXPECT_NEAR(psi.derivative(x), fd, 1e-8) << "x = " << x;
    }
}

TEST(TestFunctions, CollisionSetCoversCollisionPoint)
{
    const auto set = collision_test_functions(7.0, 10.0);
    ASSERT_EQ(set.size(), 7u);
    for (const auto& psi : set) {
        EXPECT_LT(psi.lower(), 7.0);
        EXPECT_GT(psi.upper(), 7.0);
        EXPECT_GE(psi.half_width, 10.0);
    }
    EXPECT_THROW(collision_test_functions(0.0, 0.0), ValidationError);
}

// For an exact soliton the weak residuals reduce to the dispersive remainders
// eps^2 int u psi''' and eps^2 int u^2 psi'''.
TEST(WeakResidual, ExactSolitonLeavesDispersiveRemainder)
{
    const auto nl = Nonlinearity::homogeneous(2.0);
    const auto p = solve_profile(nl, 1.0);
    const double eps = 0.1;
    const auto fam = soliton_family(p, eps, 0.0);
    const TestFunctionSet psis{{0.5, 1.0, {1.0}}, {1.0, 2.0, {1.0, 0.5}}};
    const std::vector<double> tg{0.5, 1.0, 1.5};
    const auto rep = weak_residual(fam, nl, psis, tg);

    for (std::size_t i = 0; i < psis.size(); ++i) {
        const auto& psi = psis[i];
        const auto x = num::linspace(psi.lower(), psi.upper(), 40001);
        const double h = x[1] - x[0];
        std::vector<double> u, ux;
        for (std::size_t k = 0; k < tg.size(); ++k) {
            fam.sample(tg[k], x, u, ux);
            double el = 0.0, eq = 0.0;
            for (std::size_t j = 0; j < x.size(); ++j) {
                const double d3 = third_derivative(psi, x[j]);
                el += u[j] * d3;
                eq += u[j] * u[j] * d3;
            }
            el *= eps * eps * h;
            eq *= eps * eps * h;
            EXPECT_NEAR(rep.linear[i][k], el, 1e-7 + 1e-4 * std::abs(el)) << "psi " << i << " t " << tg[k];
            EXPECT_NEAR(rep.quadratic[i][k], eq, 1e-7 + 1e-4 * std::abs(eq)) << "psi " << i << " t " << tg[k];
        }
    }
}

TEST(BalanceLaws, ExactSolitonSatisfiesAllFour)
{
    const auto nl = Nonlinearity::homogeneous(1.5);
    const auto p = solve_profile(nl, 2.0);
    const auto fam = soliton_family(p, 0.05, 1.0);
    const auto rep = balance_laws(fam, nl, {0.0, 0.5, 1.0});
    ASSERT_EQ(rep.max_drift.size(), 4u);
    for (std::size_t law = 0; law < 4; ++law)
        EXPECT_LT(rep.max_drift[law], 1e-8 * std::max(1.0, rep.scale[law])) << "law " << law;
}

TEST(OrderFits, RecoverSyntheticOrder)
{
    std::vector<WeakResidualReport> reps;
    for (double e : {0.1, 0.05, 0.025}) {
        WeakResidualReport r;
        r.epsilon = e;
        r.max_linear = {3.0 * e * e, 0.5 * e};
        r.max_quadratic = {e * e * e, 2.0 * e * e};
        reps.push_back(r);
    }
    const auto fit = residual_orders(reps);
    EXPECT_NEAR(fit.linear[0], 2.0, 1e-12);
    EXPECT_NEAR(fit.linear[1], 1.0, 1e-12);
    EXPECT_NEAR(fit.quadratic[0], 3.0, 1e-12);
    EXPECT_NEAR(fit.quadratic[1], 2.0, 1e-12);
    reps.pop_back();
    EXPECT_THROW(residual_orders(reps), ValidationError);
}

TEST(TimeGrid, CentredOnCollision)
{
    InteractionConfig cfg;
    cfg.a1 = 3.0;
    cfg.a2 = 6.0;
    cfg.x1_0 = 5.0;
    const CollisionModel model(Nonlinearity::homogeneous(2.0), cfg);
    const auto tg = interaction_time_grid(model, 0.05, 21, 10.0);
    ASSERT_EQ(tg.size(), 21u);
    EXPECT_NEAR(tg[10], model.geometry().t_star, 1e-12);
    EXPECT_NEAR(tg.back() - tg.front(), 2.0 * 10.0 * 0.05 / model.geometry().psi_dot, 1e-12);
}

TEST(RandomNonlinearity, AdmissibleAndReproducible)
{
    std::mt19937_64 a(42), b(42);
    for (int k = 0; k < 30; ++k) {
        const auto n1 = random_power_sum(a);
        const auto n2 = random_power_sum(b);
        ASSERT_GE(n1.terms().size(), 1u);
        ASSERT_LE(n1.terms().size(), 3u);
        EXPECT_TRUE(validate_terms(n1.terms(), n1.u_max()).admissible());
        EXPECT_EQ(n1.g1(0.7), n2.g1(0.7));
        EXPECT_EQ(n1.terms().size(), n2.terms().size());
    }
}
