#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "kdvlab/pde.hpp"
#include "kdvlab/profile.hpp"

using namespace kdv;

namespace {

const Nonlinearity& kdv_nl()
{
    static const auto nl = Nonlinearity::homogeneous(2.0);
    return nl;
}

WaveField kdv_soliton(double a, double center, double eps, std::size_t n, double length = 20.0)
{
    return soliton_field(solve_profile(kdv_nl(), a), center, eps, 0.0, length, n);
}

} // namespace

TEST(Pde, InvariantsOfSampledSoliton)
{
    const auto w = kdv_soliton(1.0, 10.0, 0.1, 1024);
    // int A omega(beta x / eps) = eps a1 / beta with a1 = 4, beta = sqrt(2/3)
    EXPECT_NEAR(mass(w), 0.1 * 4.0 / std::sqrt(2.0 / 3.0), 1e-12);
    EXPECT_NEAR(momentum(w), 0.1 * (8.0 / 3.0) / std::sqrt(2.0 / 3.0), 1e-12);
    EXPECT_LT(spectral_tail(w), 1e-12);
}

TEST(Pde, SolitonTranslatesAtItsSpeed)
{
    const double eps = 0.1, t_end = 3.0;
    const auto w = kdv_soliton(1.0, 5.0, eps, 1024);
    SolverConfig cfg;
    cfg.t_end = t_end;
    const auto tr = evolve(w, kdv_nl(), cfg);
    const auto peaks = extract_solitons(tr.snapshots.back(), 0.5);
    ASSERT_EQ(peaks.size(), 1u);
    EXPECT_NEAR(peaks[0].position, 5.0 + (2.0 / 3.0) * t_end, 1e-3);
    EXPECT_NEAR(peaks[0].amplitude, 1.0, 1e-3);
    EXPECT_LT(std::abs(tr.mass.back() / tr.mass.front() - 1.0), 1e-12);
    EXPECT_LT(tr.max_undershoot, 1e-6);
}

TEST(Pde, IntegratingFactorSchemeAgreesOnShortRun)
{
    const auto w = kdv_soliton(1.0, 5.0, 0.1, 1024);
    SolverConfig a, b;
    a.t_end = b.t_end = 0.5;
    b.scheme = Scheme::if_rk4;
    const auto ua = evolve(w, kdv_nl(), a).snapshots.back().u;
    const auto ub = evolve(w, kdv_nl(), b).snapshots.back().u;
    double diff = 0.0;
    for (std::size_t j = 0; j < ua.size(); ++j) diff = std::max(diff, std::abs(ua[j] - ub[j]));
    EXPECT_LT(diff, 1e-5);
}

TEST(Pde, SnapshotsLandOnRequestedTimes)
{
    const auto w = kdv_soliton(1.0, 5.0, 0.1, 1024);
    SolverConfig cfg;
    cfg.t_end = 1.0;
    cfg.snapshot_times = {0.25, 0.6};
    const auto tr = evolve(w, kdv_nl(), cfg);
    ASSERT_EQ(tr.snapshots.size(), 4u);
    EXPECT_EQ(tr.snapshots[0].t, 0.0);
    EXPECT_EQ(tr.snapshots[1].t, 0.25);
    EXPECT_EQ(tr.snapshots[2].t, 0.6);
    EXPECT_EQ(tr.snapshots[3].t, 1.0);
    EXPECT_EQ(tr.mass.size(), 4u);
}

TEST(Pde, LinearDampingDecaysMass)
{
    const auto w = kdv_soliton(1.0, 5.0, 0.1, 1024);
    SolverConfig cfg;
    cfg.t_end = 1.0;
    const double gamma = 0.3;
    const auto tr = evolve(w, kdv_nl(), cfg, [gamma](double, double, double u) { return -gamma * u; });
    EXPECT_NEAR(tr.mass.back() / tr.mass.front(), std::exp(-gamma), 1e-8);
}

TEST(Pde, InputValidation)
{
    SolverConfig cfg;
    cfg.t_end = 0.1;
    EXPECT_THROW(evolve(kdv_soliton(1.0, 5.0, 0.1, 384), kdv_nl(), cfg), ValidationError);
    EXPECT_THROW(evolve(kdv_soliton(1.0, 5.0, 0.1, 128), kdv_nl(), cfg), ValidationError);
    // too narrow for the grid
    EXPECT_THROW(evolve(kdv_soliton(1.0, 5.0, 0.005, 256), kdv_nl(), cfg), ValidationError);
    const auto w = kdv_soliton(1.0, 5.0, 0.1, 1024);
    cfg.dt = 10.0 * stable_dt(kdv_nl(), w, cfg.courant);
    EXPECT_THROW(evolve(w, kdv_nl(), cfg), ValidationError);
}

TEST(Pde, StableStepFollowsCourantBound)
{
    const auto w = kdv_soliton(2.0, 5.0, 0.1, 512);
    const double umax = *std::max_element(w.u.begin(), w.u.end());
    // g''(u) = 2u for KdV, evaluated at 1.2 max u
    EXPECT_NEAR(stable_dt(kdv_nl(), w, 0.3), 0.3 * w.dx() / (2.0 * 1.2 * umax), 1e-15);
}

TEST(Pde, PeakExtractionFindsBothSolitons)
{
    auto w = kdv_soliton(2.0, 4.0, 0.1, 1024);
    const auto w2 = kdv_soliton(1.0, 12.3, 0.1, 1024);
    for (std::size_t j = 0; j < w.size(); ++j) w.u[j] += w2.u[j];
    const auto peaks = extract_solitons(w, 0.5);
    ASSERT_EQ(peaks.size(), 2u);
    EXPECT_NEAR(peaks[0].position, 4.0, 1e-3);
    EXPECT_NEAR(peaks[1].position, 12.3, 1e-3);
    EXPECT_NEAR(peaks[0].amplitude, 2.0, 1e-3);
    EXPECT_NEAR(peaks[1].amplitude, 1.0, 1e-3);
}
