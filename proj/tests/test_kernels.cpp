#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <boost/math/distributions/poisson.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "urn/dist.hpp"
#include "urn/kernels.hpp"

using namespace urn;
using namespace urn::kernels;

namespace
{
void expect_close(double a, double b, double rel, char const* what)
{
    double const scale = std::max({std::abs(a), std::abs(b), 1e-300});
    EXPECT_LE(std::abs(a - b), rel * scale) << what << ": " << a << " vs " << b;
}
}  // namespace

TEST(Kernels, PoissonTermAgainstBoost)
{
    for (int k : {1, 2, 3, 5, 12, 32})
    {
        for (double y : {0.0, 1e-12, 1e-5, 0.03, 0.5, 0.999, 1.0, 2.5, 10.0, 40.0, 300.0})
        {
            auto const p = poisson_term(y, k);
            if (y == 0)
            {
                EXPECT_EQ(p.ge, 0.0);
                EXPECT_EQ(p.lt, 1.0);
                continue;
            }
            double const lt = boost::math::gamma_q(static_cast<double>(k), y);
            double const ge = boost::math::gamma_p(static_cast<double>(k), y);
            boost::math::poisson_distribution<double> pd(y);
            double const eq = boost::math::pdf(pd, static_cast<double>(k));
            EXPECT_NEAR(p.lt, lt, 1e-14) << y << " " << k;
            EXPECT_NEAR(p.ge, ge, 1e-14) << y << " " << k;
            EXPECT_NEAR(p.eq, eq, 1e-14) << y << " " << k;
            // Small y: the upper series keeps relative accuracy.
            if (y < 1 && ge > 0)
                expect_close(p.ge, ge, 1e-13, "relative ge");
        }
    }
    auto const big = poisson_term(1e4, 3);
    EXPECT_EQ(big.ge, 1.0);
    EXPECT_EQ(big.eq, 0.0);
}

TEST(Kernels, DispatchRejectsBadK)
{
    std::vector<double> p(8, 0.1);
    EXPECT_THROW(poisson_sums(p, 1.0, 0), std::invalid_argument);
    EXPECT_THROW(poisson_sums(p, 1.0, 33), std::invalid_argument);
    EXPECT_TRUE(isa_supported(Isa::scalar));
}

TEST(Kernels, Avx2MatchesScalar)
{
    if (!isa_supported(Isa::avx2))
        GTEST_SKIP() << "AVX2 not available";
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> logp(-25.0, 0.0);
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 64u, 1001u, 4096u})
    {
        std::vector<double> probs(n);
        for (auto& p : probs)
            p = std::exp(logp(rng));
        for (double t : {0.0, 1e-3, 1.0, 1e2, 1e6, 1e10, 1e13})
        {
            for (int k = 1; k <= kMaxK; k += (k < 4 ? 1 : 7))
            {
                auto const a = poisson_sums(Isa::scalar, probs, t, k);
                auto const b = poisson_sums(Isa::avx2, probs, t, k);
                // Each cell term agrees to a few ulps of 1; the block sums
                // differ further by summation order.
                double const per_term = 16 * std::numeric_limits<double>::epsilon();
                auto near = [&](double x, double y, char const* what) {
                    EXPECT_LE(std::abs(x - y), 1e-13 * std::abs(x) + per_term * n)
                        << what << " n=" << n << " t=" << t << " k=" << k;
                };
                near(a.star_mean, b.star_mean, "star_mean");
                near(a.star_var, b.star_var, "star_var");
                near(a.exact_mean, b.exact_mean, "exact_mean");
                near(a.exact_var, b.exact_var, "exact_var");
            }
        }
    }
}

TEST(Kernels, Avx2MatchesScalarOnDistributionHead)
{
    if (!isa_supported(Isa::avx2))
        GTEST_SKIP() << "AVX2 not available";
    auto const d = build_distribution(DistributionSpec::zipf(2.0));
    auto const probs = d.cached_probs();
    for (double t : {1e2, 1e5, 1e8})
    {
        for (int k : {1, 2, 3})
        {
            auto const a = poisson_sums(Isa::scalar, probs, t, k);
            auto const b = poisson_sums(Isa::avx2, probs, t, k);
            // Summation order over 2^16 cells.
            double const tol = 16 * std::numeric_limits<double>::epsilon() * probs.size();
            EXPECT_NEAR(a.star_mean, b.star_mean, tol);
            EXPECT_NEAR(a.star_var, b.star_var, tol);
            EXPECT_NEAR(a.exact_mean, b.exact_mean, tol);
            EXPECT_NEAR(a.exact_var, b.exact_var, tol);
        }
    }
}

TEST(Kernels, SaturationAndUnderflowEdges)
{
    std::vector<double> probs = {1.0, 0.9, 0.8, 0.75, 0.7};
    for (auto isa : {Isa::scalar, Isa::avx2})
    {
        if (!isa_supported(isa))
            continue;
        // y between 700 and 1000 straddles both cut-offs.
        auto const s = poisson_sums(isa, probs, 1000.0, 1);
        EXPECT_NEAR(s.star_mean, 5.0, 1e-12);
        EXPECT_NEAR(s.star_var, 0.0, 1e-290);
        EXPECT_NEAR(s.exact_mean, 0.0, 1e-290);
    }
}
