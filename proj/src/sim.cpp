#include "urn/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace urn
{

OccupancyState::OccupancyState(int k_max, std::size_t expected_sparse)
    : k_max_(k_max), dense_(kDenseCells + 1, 0), rstar_(k_max + 2, 0)
{
    if (k_max < 1)
        throw std::invalid_argument("k_max must be >= 1");
    sparse_.reserve(expected_sparse);
}

void OccupancyState::add_ball(CellIndex cell)
{
    if (cell == 0)
        throw std::invalid_argument("cell indices start at 1");
    ++balls_;
    std::uint64_t c;
    if (cell >= kFarTailIndex)
    {
        ++far_singletons_;
        c = 1;
    }
    else if (cell <= kDenseCells)
    {
        c = ++dense_[cell];
    }
    else
    {
        c = ++sparse_[cell];
    }
    if (c <= static_cast<std::uint64_t>(k_max_ + 1))
        ++rstar_[c];
}

std::uint64_t OccupancyState::rstar(int k) const
{
    if (k < 1 || k > k_max_ + 1)
        throw std::out_of_range("k outside 1..k_max+1");
    return rstar_[k];
}

std::uint64_t OccupancyState::r(int k) const
{
    if (k < 1 || k > k_max_)
        throw std::out_of_range("k outside 1..k_max");
    return rstar_[k] - rstar_[k + 1];
}

std::uint64_t OccupancyState::count(CellIndex cell) const
{
    if (cell == 0 || cell >= kFarTailIndex)
        return 0;
    if (cell <= kDenseCells)
        return dense_[cell];
    auto const it = sparse_.find(cell);
    return it == sparse_.end() ? 0 : it->second;
}

ProfileRow OccupancyState::snapshot() const
{
    ProfileRow row;
    row.ball_count = balls_;
    row.rstar.assign(rstar_.begin() + 1, rstar_.begin() + 1 + k_max_);
    row.r.resize(k_max_);
    for (int k = 1; k <= k_max_; ++k)
        row.r[k - 1] = rstar_[k] - rstar_[k + 1];
    return row;
}

std::map<std::uint64_t, std::uint64_t> OccupancyState::histogram() const
{
    std::map<std::uint64_t, std::uint64_t> h;
    for (auto c : dense_)
    {
        if (c)
            ++h[c];
    }
    for (auto const& [cell, c] : sparse_)
        ++h[c];
    if (far_singletons_)
        h[1] += far_singletons_;
    return h;
}

//---------------------------------------------------------------------------//

void CheckpointGrid::validate() const
{
    if (n.empty())
        throw std::invalid_argument("checkpoint grid is empty");
    if (n.front() < 1)
        throw std::invalid_argument("checkpoints must be >= 1");
    for (std::size_t i = 1; i < n.size(); ++i)
    {
        if (n[i] <= n[i - 1])
            throw std::invalid_argument("checkpoints must be strictly increasing");
    }
    if (k_max < 1)
        throw std::invalid_argument("k_max must be >= 1");
}

CheckpointGrid CheckpointGrid::log_spaced(std::uint64_t n_min, std::uint64_t n_max, int points,
                                          int k_max)
{
    if (n_min < 1 || n_max < n_min || points < 1)
        throw std::invalid_argument("bad grid: need 1 <= n_min <= n_max and points >= 1");
    CheckpointGrid g;
    g.k_max = k_max;
    if (points == 1 || n_min == n_max)
    {
        g.n.push_back(n_max);
        return g;
    }
    double const lo = std::log(static_cast<double>(n_min));
    double const hi = std::log(static_cast<double>(n_max));
    for (int i = 0; i < points; ++i)
    {
        std::uint64_t v;
        if (i == 0)
            v = n_min;
        else if (i == points - 1)
            v = n_max;
        else
            v = static_cast<std::uint64_t>(std::llround(std::exp(lo + (hi - lo) * i / (points - 1))));
        if (g.n.empty() || v > g.n.back())
            g.n.push_back(v);
    }
    g.validate();
    return g;
}

std::vector<std::uint64_t> poisson_increments(CheckpointGrid const& grid, RandomState& rng)
{
    grid.validate();
    std::vector<std::uint64_t> K;
    K.reserve(grid.n.size());
    std::uint64_t prev_n = 0;
    std::uint64_t total = 0;
    for (auto n : grid.n)
    {
        // libstdc++ uses an exact rejection method for large means.
        std::poisson_distribution<std::int64_t> draw(static_cast<double>(n - prev_n));
        total += static_cast<std::uint64_t>(draw(rng));
        K.push_back(total);
        prev_n = n;
    }
    return K;
}

CoupledTrajectory run_coupled(CellDistribution const& d, CheckpointGrid const& grid,
                              std::uint64_t seed, std::optional<std::vector<std::uint64_t>> forced_K)
{
    grid.validate();
    RandomState count_rng(derive_seed(seed, 0));
    RandomState ball_rng(derive_seed(seed, 1));

    std::vector<std::uint64_t> K;
    if (forced_K)
    {
        if (forced_K->size() != grid.n.size())
            throw std::invalid_argument("forced K must match the grid length");
        K = *forced_K;
    }
    else
    {
        K = poisson_increments(grid, count_rng);
    }

    std::vector<std::uint64_t> schedule = grid.n;
    schedule.insert(schedule.end(), K.begin(), K.end());
    std::sort(schedule.begin(), schedule.end());
    schedule.erase(std::unique(schedule.begin(), schedule.end()), schedule.end());

    double const n_last = static_cast<double>(schedule.back());
    double expected = n_last * d.tail_mass(OccupancyState::kDenseCells);
    if (d.theta() < 1.0)
        expected = std::min(expected, std::tgamma(1.0 - d.theta()) * d.alpha(n_last));
    OccupancyState state(grid.k_max, static_cast<std::size_t>(std::min(expected, 1e8)));

    std::vector<ProfileRow> snaps;
    snaps.reserve(schedule.size());
    for (auto pos : schedule)
    {
        while (state.ball_count() < pos)
            state.add_ball(d.sample(ball_rng));
        snaps.push_back(state.snapshot());
    }
    auto at = [&](std::uint64_t pos) -> ProfileRow const& {
        auto const it = std::lower_bound(schedule.begin(), schedule.end(), pos);
        return snaps[static_cast<std::size_t>(it - schedule.begin())];
    };

    CoupledTrajectory out;
    out.seed = seed;
    out.k_max = grid.k_max;
    out.rows.reserve(grid.n.size());
    for (std::size_t i = 0; i < grid.n.size(); ++i)
    {
        auto const& f = at(grid.n[i]);
        auto const& p = at(K[i]);
        out.rows.push_back({grid.n[i], K[i], f.rstar, p.rstar, f.r, p.r});
    }
    return out;
}

}  // namespace urn
