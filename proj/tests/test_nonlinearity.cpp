#include <gtest/gtest.h>

#include "kdvlab/nonlinearity.hpp"

using namespace kdv;

TEST(Nonlinearity, KdvValuesAtOne)
{
    const auto nl = Nonlinearity::power_sum({{1.0 / 3.0, 1.0}}, 10.0);
    const auto d = nl.evaluate(1.0);
    EXPECT_NEAR(d.g1, 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(d.g, 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(d.g_prime, 1.0, 1e-15);
    EXPECT_NEAR(d.g2, -2.0 / 3.0, 1e-15);
}

TEST(Nonlinearity, ThreeHalvesValuesAtFour)
{
    const auto nl = Nonlinearity::power_sum({{0.4, 0.5}}, 10.0);
    const auto d = nl.evaluate(4.0);
    EXPECT_NEAR(d.g_prime, 8.0, 1e-13);
    EXPECT_NEAR(d.g, 12.8, 1e-13);
    EXPECT_NEAR(d.g2, -19.2, 1e-13);
}

TEST(Nonlinearity, ZeroArgumentGivesZeros)
{
    const auto nl = Nonlinearity::power_sum({{0.5, 0.3}, {1.0, 2.0}}, 50.0);
    const auto d = nl.evaluate(0.0);
    EXPECT_EQ(d.g1, 0.0);
    EXPECT_EQ(d.g1_prime, 0.0);
    EXPECT_EQ(d.g, 0.0);
    EXPECT_EQ(d.g_prime, 0.0);
    EXPECT_EQ(d.g2, 0.0);
}

TEST(Nonlinearity, NegativeArgumentRejected)
{
    const auto nl = Nonlinearity::homogeneous(2.0);
    EXPECT_THROW((void)nl.evaluate(-0.1), ValidationError);
}

TEST(Nonlinearity, ExponentAboveFourRejected)
{
    EXPECT_THROW(Nonlinearity::power_sum({{1.0, 5.0}}, 10.0), ValidationError);
    const auto rep = validate_terms({{1.0, 5.0}}, 10.0);
    EXPECT_FALSE(rep.admissible());
}

TEST(Nonlinearity, UnorderedExponentsRejected)
{
    EXPECT_THROW(Nonlinearity::power_sum({{1.0, 2.0}, {1.0, 1.0}}, 10.0), ValidationError);
}

TEST(Nonlinearity, NonMonotoneG1Rejected)
{
    // g1 = z - z^2 turns over at z = 1/2
    const auto rep = validate_terms({{1.0, 1.0}, {-1.0, 2.0}}, 10.0);
    EXPECT_FALSE(rep.admissible());
}

TEST(Nonlinearity, HomogeneousMatchesPowerLaw)
{
    for (double kappa : {1.5, 2.0, 3.0}) {
        const auto nl = Nonlinearity::homogeneous(kappa);
        for (double u : {0.3, 1.0, 7.0}) EXPECT_NEAR(nl.g_prime(u), std::pow(u, kappa), 1e-12 * std::pow(u, kappa));
    }
}

TEST(Nonlinearity, DerivedFunctionsConsistent)
{
    const auto nl = Nonlinearity::power_sum({{0.2, 0.5}, {0.05, 1.5}, {0.01, 3.0}}, 20.0);
    for (double u : {0.1, 1.0, 3.0, 15.0}) {
        const double h = 1e-5 * u;
        EXPECT_NEAR(nl.g_prime(u), (nl.g(u + h) - nl.g(u - h)) / (2 * h), 1e-7 * std::max(1.0, nl.g_prime(u)));
        EXPECT_NEAR(nl.g_second(u), (nl.g_prime(u + h) - nl.g_prime(u - h)) / (2 * h), 1e-6 * std::max(1.0, nl.g_second(u)));
        EXPECT_NEAR(nl.g2(u), nl.g(u) - u * nl.g_prime(u), 1e-12 * std::max(1.0, std::abs(nl.g2(u))));
        EXPECT_LE(nl.g2(u), 0.0);
    }
}

TEST(Nonlinearity, SpeedAndWidth)
{
    const auto nl = Nonlinearity::homogeneous(2.0);
    const auto sw = speed_and_width(nl, 3.0);
    EXPECT_NEAR(sw.speed, 2.0, 1e-15);
    EXPECT_NEAR(sw.beta, std::sqrt(2.0), 1e-15);
    EXPECT_THROW(speed_and_width(nl, 0.0), ValidationError);
}
