#include <gtest/gtest.h>

#include <cmath>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/expint.hpp>

#include "urn/moments.hpp"
#include "urn/regvar.hpp"

using namespace urn;

TEST(RegVar, ZipfL)
{
    auto const d = build_distribution(DistributionSpec::zipf(2.0));
    RegVarProfile const p(d);
    double const limit = std::sqrt(6.0) / M_PI;  // (1/zeta(2))^{1/2}
    for (double x = 1e4; x <= 1e10; x *= 10)
    {
        double const L = slowly_varying_L(p, x);
        EXPECT_DOUBLE_EQ(L, static_cast<double>(d.alpha(x)) / std::sqrt(x));
        // alpha is within 1 of sqrt(x/zeta(2))
        EXPECT_NEAR(L, limit, 1.0 / std::sqrt(x)) << x;
    }
}

TEST(RegVar, ThetaOneL)
{
    auto const d = build_distribution(DistributionSpec::theta_one_log());
    RegVarProfile const p(d);
    EXPECT_DOUBLE_EQ(p.theta(), 1.0);
    EXPECT_DOUBLE_EQ(slowly_varying_L(p, 1e8), static_cast<double>(d.alpha(1e8)) / 1e8);
    double prev = 1.0;
    for (double x = 1e4; x <= 1e12; x *= 10)
    {
        double const L = slowly_varying_L(p, x);
        EXPECT_LT(L, prev) << x;
        prev = L;
    }
}

TEST(RegVar, GeometricL)
{
    auto const d = build_distribution(DistributionSpec::geometric(0.5));
    RegVarProfile const p(d);
    for (double x : {2.0, 10.0, 1e6})
        EXPECT_EQ(slowly_varying_L(p, x), static_cast<double>(d.alpha(x)));
    EXPECT_THROW(p.lstar(100.0), std::invalid_argument);
}

TEST(RegVar, LstarHookClosedForm)
{
    // L(x) = c e^{-x/X0}: L*(t) = 2c K_0(2 sqrt(t/X0)).
    double const c = 0.7;
    double const X0 = 1e6;
    RegVarProfile const p(
        1.0, [=](double x) { return c * std::exp(-x / X0); },
        [=](double X) { return c * boost::math::expint(1, X / X0); }, c);
    for (double t : {1.0, 10.0, 1e3, 1e5, 1e6, 3e6})
    {
        double const exact = 2 * c * boost::math::cyl_bessel_k(0, 2 * std::sqrt(t / X0));
        auto const v = p.lstar(t);
        EXPECT_NEAR(v.value, exact, 1e-6 * exact) << t;
        EXPECT_LT(v.error, 1e-6 * exact);
    }
    EXPECT_THROW(p.lstar(0.5), std::invalid_argument);
}

TEST(RegVar, LstarThetaOneDecreasing)
{
    auto const d = build_distribution(DistributionSpec::theta_one_log());
    RegVarProfile const p(d);
    double prev = 1.0;
    for (double t = 1e4; t <= 1e10; t *= 10)
    {
        auto const v = p.lstar(t);
        EXPECT_LT(v.value, prev) << t;
        EXPECT_LT(v.error, 1e-6 * v.value);
        prev = v.value;
    }
    EXPECT_LT(prev, 0.05);
}

TEST(RegVar, LstarResolutionsAgree)
{
    auto const d = build_distribution(DistributionSpec::theta_one_log());
    RegVarProfile const p(d);
    for (double t : {1e3, 1e6, 1e9})
    {
        double const coarse = p.lstar(t, 1e-7).value;
        double const fine = p.lstar(t, 1e-12).value;
        EXPECT_NEAR(coarse, fine, 1e-6 * fine);
    }
}

TEST(RegVar, LstarMatchesOccupancyMean)
{
    // t L*(t) with the smooth L against E R_P(t) from the exact series: the
    // step and smooth counting functions differ by less than one cell.
    auto const d = build_distribution(DistributionSpec::theta_one_log());
    RegVarProfile const p(d);
    for (double t : {1e2, 1e4, 1e6, 1e8})
    {
        double const series = exact_mean(d, t, 1, true).value / t;
        EXPECT_NEAR(p.lstar(t).value, series, 1.0 / t) << t;
    }
}
