#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "urn/dist.hpp"

namespace urn
{

// Counts for k = 1..k_max stored at index k - 1.
struct ProfileRow
{
    std::uint64_t ball_count = 0;
    std::vector<std::uint64_t> rstar;  // cells with >= k balls
    std::vector<std::uint64_t> r;      // cells with exactly k balls
};

/*!
 * Streaming cell counts with the R* profile kept current.
 *
 * Cells below 2^20 live in a flat array; larger indices go to a hash map.
 * Far-tail draws (kFarTailIndex) are distinct singletons and only counted.
 */
class OccupancyState
{
  public:
    static constexpr CellIndex kDenseCells = CellIndex{1} << 20;

    explicit OccupancyState(int k_max, std::size_t expected_sparse = 0);

    void add_ball(CellIndex cell);

    std::uint64_t ball_count() const { return balls_; }
    int k_max() const { return k_max_; }
    // Valid for k in 1..k_max + 1.
    std::uint64_t rstar(int k) const;
    std::uint64_t r(int k) const;
    std::uint64_t count(CellIndex cell) const;

    ProfileRow snapshot() const;
    // occupancy count -> number of cells with that count; walks every cell.
    std::map<std::uint64_t, std::uint64_t> histogram() const;

  private:
    int k_max_;
    std::uint64_t balls_ = 0;
    std::uint64_t far_singletons_ = 0;
    std::vector<std::uint64_t> dense_;
    std::unordered_map<CellIndex, std::uint64_t> sparse_;
    std::vector<std::uint64_t> rstar_;  // index k, size k_max + 2
};

struct CheckpointGrid
{
    std::vector<std::uint64_t> n;
    int k_max = 5;

    // Throws std::invalid_argument unless 1 <= n_1 < n_2 < ... and k_max >= 1.
    void validate() const;
    // Rounded log-spaced points with exact endpoints; duplicates dropped.
    static CheckpointGrid log_spaced(std::uint64_t n_min, std::uint64_t n_max, int points,
                                     int k_max = 5);
};

// K_i = K_{i-1} + Poisson(n_i - n_{i-1}), K_0 = n_0 = 0.
std::vector<std::uint64_t> poisson_increments(CheckpointGrid const& grid, RandomState& rng);

struct CoupledRow
{
    std::uint64_t n = 0;
    std::uint64_t K = 0;
    std::vector<std::uint64_t> rstar_fixed;
    std::vector<std::uint64_t> rstar_poisson;
    std::vector<std::uint64_t> r_fixed;
    std::vector<std::uint64_t> r_poisson;
};

struct CoupledTrajectory
{
    std::uint64_t seed = 0;
    int k_max = 0;
    std::vector<CoupledRow> rows;
};

/*!
 * Reads one i.i.d. cell stream at positions n_i and K_i.
 *
 * The Poisson counts and the ball stream use independent generators derived
 * from seed, so forcing K (a test hook) leaves the ball stream unchanged.
 */
CoupledTrajectory run_coupled(CellDistribution const& d, CheckpointGrid const& grid,
                              std::uint64_t seed,
                              std::optional<std::vector<std::uint64_t>> forced_K = std::nullopt);

}  // namespace urn
