#include <gtest/gtest.h>

#include <cmath>

#include "urn/moments.hpp"
#include "urn/sim.hpp"

using namespace urn;

namespace
{
CellDistribution const& zipf2()
{
    static auto const d = build_distribution(DistributionSpec::zipf(2.0));
    return d;
}

std::uint64_t absdiff(std::uint64_t a, std::uint64_t b) { return a > b ? a - b : b - a; }
}  // namespace

TEST(Sim, AddBallAndSnapshot)
{
    OccupancyState st(3);
    for (CellIndex c : {CellIndex{5}, CellIndex{5}, CellIndex{7}, CellIndex{5}, CellIndex{1} << 40, CellIndex{1} << 40})
        st.add_ball(c);
    EXPECT_EQ(st.ball_count(), 6u);
    EXPECT_EQ(st.rstar(1), 3u);
    EXPECT_EQ(st.rstar(2), 2u);
    EXPECT_EQ(st.rstar(3), 1u);
    EXPECT_EQ(st.rstar(4), 0u);
    EXPECT_EQ(st.r(1), 1u);
    EXPECT_EQ(st.r(2), 1u);
    EXPECT_EQ(st.r(3), 1u);
    EXPECT_EQ(st.count(5), 3u);
    EXPECT_EQ(st.count(CellIndex{1} << 40), 2u);
    EXPECT_EQ(st.count(6), 0u);
    auto const row = st.snapshot();
    EXPECT_EQ(row.ball_count, 6u);
    EXPECT_EQ(row.rstar, (std::vector<std::uint64_t>{3, 2, 1}));
    EXPECT_EQ(row.r, (std::vector<std::uint64_t>{1, 1, 1}));
    EXPECT_THROW(st.add_ball(0), std::invalid_argument);
}

TEST(Sim, HistogramConservation)
{
    auto const& d = zipf2();
    OccupancyState st(5);
    RandomState rng(derive_seed(3, 1));
    for (int i = 0; i < 200000; ++i)
        st.add_ball(d.sample(rng));
    auto const h = st.histogram();
    std::uint64_t balls = 0;
    for (auto const& [c, cells] : h)
        balls += c * cells;
    EXPECT_EQ(balls, st.ball_count());
    for (int k = 1; k <= 6; ++k)
    {
        std::uint64_t ge = 0;
        for (auto const& [c, cells] : h)
            ge += c >= static_cast<std::uint64_t>(k) ? cells : 0;
        EXPECT_EQ(ge, st.rstar(k)) << k;
        if (k <= 5)
        {
            auto const it = h.find(k);
            EXPECT_EQ(it == h.end() ? 0 : it->second, st.r(k)) << k;
        }
    }
}

TEST(Sim, GridValidation)
{
    EXPECT_THROW((CheckpointGrid{{0, 5}, 3}).validate(), std::invalid_argument);
    EXPECT_THROW((CheckpointGrid{{5, 5}, 3}).validate(), std::invalid_argument);
    EXPECT_THROW((CheckpointGrid{{1, 5}, 0}).validate(), std::invalid_argument);
    auto const g = CheckpointGrid::log_spaced(10, 1000000, 7);
    EXPECT_EQ(g.n.front(), 10u);
    EXPECT_EQ(g.n.back(), 1000000u);
    EXPECT_NO_THROW(g.validate());
}

TEST(Sim, PoissonIncrementStatistics)
{
    CheckpointGrid const grid{{100, 1000, 1100}, 1};
    RandomState rng(derive_seed(17, 0));
    constexpr int reps = 10000;
    std::vector<double> inc1(reps), inc2(reps), inc3(reps);
    for (int r = 0; r < reps; ++r)
    {
        auto const K = poisson_increments(grid, rng);
        ASSERT_EQ(K.size(), 3u);
        ASSERT_LE(K[0], K[1]);
        ASSERT_LE(K[1], K[2]);
        inc1[r] = static_cast<double>(K[0]);
        inc2[r] = static_cast<double>(K[1] - K[0]);
        inc3[r] = static_cast<double>(K[2] - K[1]);
    }
    auto mean = [](std::vector<double> const& v) {
        double s = 0;
        for (double x : v)
            s += x;
        return s / static_cast<double>(v.size());
    };
    double const lambdas[] = {100, 900, 100};
    std::vector<double> const* cols[] = {&inc1, &inc2, &inc3};
    for (int i = 0; i < 3; ++i)
        EXPECT_NEAR(mean(*cols[i]), lambdas[i], 4 * std::sqrt(lambdas[i] / reps)) << i;
    // Increments are independent.
    double const m1 = mean(inc1), m2 = mean(inc2);
    double c = 0, v1 = 0, v2 = 0;
    for (int r = 0; r < reps; ++r)
    {
        c += (inc1[r] - m1) * (inc2[r] - m2);
        v1 += (inc1[r] - m1) * (inc1[r] - m1);
        v2 += (inc2[r] - m2) * (inc2[r] - m2);
    }
    EXPECT_LT(std::abs(c / std::sqrt(v1 * v2)), 0.05);

    RandomState a(derive_seed(17, 5)), b(derive_seed(17, 5));
    EXPECT_EQ(poisson_increments(grid, a), poisson_increments(grid, b));
}

TEST(Sim, CoupledFirstBall)
{
    CheckpointGrid const grid{{1, 2, 10}, 2};
    auto const tr = run_coupled(zipf2(), grid, 9);
    ASSERT_EQ(tr.rows.size(), 3u);
    EXPECT_EQ(tr.rows[0].n, 1u);
    EXPECT_EQ(tr.rows[0].rstar_fixed[0], 1u);
    EXPECT_EQ(tr.rows[0].rstar_fixed[1], 0u);
    EXPECT_EQ(tr.k_max, 2);
    EXPECT_EQ(tr.seed, 9u);
}

TEST(Sim, CoupledLipschitzAndMonotone)
{
    auto const grid = CheckpointGrid::log_spaced(16, 200000, 12, 4);
    for (std::uint64_t seed = 0; seed < 20; ++seed)
    {
        auto const tr = run_coupled(zipf2(), grid, seed);
        for (std::size_t i = 0; i < tr.rows.size(); ++i)
        {
            auto const& row = tr.rows[i];
            auto const gap = absdiff(row.n, row.K);
            for (int k = 0; k < 4; ++k)
            {
                // One ball changes each count by at most one.
                ASSERT_LE(absdiff(row.rstar_fixed[k], row.rstar_poisson[k]), gap);
                ASSERT_LE(absdiff(row.r_fixed[k], row.r_poisson[k]), gap);
                if (k > 0)
                    ASSERT_LE(row.rstar_fixed[k], row.rstar_fixed[k - 1]);
                if (i > 0)
                    ASSERT_GE(row.rstar_fixed[k], tr.rows[i - 1].rstar_fixed[k]);
            }
            ASSERT_LE(row.rstar_fixed[0], row.n);
        }
    }
}

TEST(Sim, CoupledForcedKMatches)
{
    auto const grid = CheckpointGrid::log_spaced(16, 100000, 6, 3);
    auto const tr = run_coupled(zipf2(), grid, 4, grid.n);
    for (auto const& row : tr.rows)
    {
        EXPECT_EQ(row.K, row.n);
        EXPECT_EQ(row.rstar_fixed, row.rstar_poisson);
        EXPECT_EQ(row.r_fixed, row.r_poisson);
    }
    // Forcing K leaves the ball stream unchanged.
    auto const free = run_coupled(zipf2(), grid, 4);
    for (std::size_t i = 0; i < tr.rows.size(); ++i)
        EXPECT_EQ(free.rows[i].rstar_fixed, tr.rows[i].rstar_fixed);
}

TEST(Sim, CoupledDeterministic)
{
    auto const d = build_distribution(DistributionSpec::theta_one_log());
    auto const grid = CheckpointGrid::log_spaced(16, 100000, 8, 5);
    auto const a = run_coupled(d, grid, 77);
    auto const b = run_coupled(d, grid, 77);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i)
    {
        EXPECT_EQ(a.rows[i].K, b.rows[i].K);
        EXPECT_EQ(a.rows[i].rstar_fixed, b.rows[i].rstar_fixed);
        EXPECT_EQ(a.rows[i].rstar_poisson, b.rows[i].rstar_poisson);
    }
    auto const c = run_coupled(d, grid, 78);
    EXPECT_NE(a.rows.back().rstar_fixed, c.rows.back().rstar_fixed);
}

TEST(Sim, CoupledMeansMatchExactSeries)
{
    // 1000 seeds at n = 1e5 against the exact binomial and Poisson means.
    CheckpointGrid const grid{{100000}, 2};
    constexpr int seeds = 1000;
    std::vector<double> fixed[2], pois[2];
    for (int s = 0; s < seeds; ++s)
    {
        auto const tr = run_coupled(zipf2(), grid, derive_seed(123, s));
        for (int k = 0; k < 2; ++k)
        {
            fixed[k].push_back(static_cast<double>(tr.rows[0].rstar_fixed[k]));
            pois[k].push_back(static_cast<double>(tr.rows[0].rstar_poisson[k]));
        }
    }
    auto check = [&](std::vector<double> const& v, double exact) {
        double m = 0, m2 = 0;
        for (double x : v)
            m += x;
        m /= seeds;
        for (double x : v)
            m2 += (x - m) * (x - m);
        double const se = std::sqrt(m2 / (seeds - 1) / seeds);
        EXPECT_NEAR(m, exact, 4 * se);
    };
    for (int k : {1, 2})
    {
        SCOPED_TRACE(k);
        check(fixed[k - 1], exact_mean(zipf2(), 1e5, k, true, Law::binomial).value);
        check(pois[k - 1], exact_mean(zipf2(), 1e5, k, true).value);
    }
}
