#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace urn
{

using CellIndex = std::uint64_t;
using RandomState = std::mt19937_64;

// Draws at or beyond this index cannot be told apart; the sampler reports
// them as far-tail cells and the simulator treats each one as a new cell.
inline constexpr CellIndex kFarTailIndex = CellIndex{1} << 62;

enum class Family
{
    zipf,           // p_j ~ j^-s
    zipf_log,       // p_j ~ j^-s (ln(j+e))^-a
    theta_one_log,  // p_j ~ j^-1 (ln(j+e))^-2
    geometric       // p_j = (1-q) q^(j-1)
};

std::string_view to_string(Family f);
Family parse_family(std::string_view name);

struct DistributionSpec
{
    Family family = Family::zipf;
    double s = 0.0;
    double a = 0.0;
    double q = 0.0;
    double normalization_tolerance = 1e-12;

    static DistributionSpec zipf(double s);
    static DistributionSpec zipf_log(double s, double a);
    static DistributionSpec theta_one_log();
    static DistributionSpec geometric(double q);

    // Throws std::invalid_argument with a diagnostic.
    void validate() const;

    // "family = zipf\ns = 2\n..." (only the keys the family uses)
    std::string to_text() const;
    static DistributionSpec from_text(std::string_view text);
};

/*!
 * A concrete infinite discrete law p_1 >= p_2 >= ... > 0.
 *
 * Probabilities are known in closed form up to the normalization constant,
 * which is computed once by partial summation plus a midpoint-rule integral
 * tail. The continuous extension density(x) coincides with prob(j) at
 * integers and is used for tail integrals and the sampler's tail block.
 */
class CellDistribution
{
  public:
    explicit CellDistribution(DistributionSpec spec);

    DistributionSpec const& spec() const { return spec_; }
    Family family() const { return spec_.family; }
    double normalizer() const { return z_; }
    // Error estimate attached to the normalization constant.
    double normalizer_error() const { return z_err_; }
    double theta() const { return theta_; }

    double prob(CellIndex j) const;
    double density(double x) const;
    // Fill out[i] = p_{first + i}.
    void fill_probs(CellIndex first, std::span<double> out) const;
    // p_1..p_n for n = cached_count(); shared by the sampler and the series.
    std::span<double const> cached_probs() const { return head_; }

    // max{j : p_j >= 1/x}, 0 if none.
    CellIndex alpha(double x) const;
    // Real-valued counting function with alpha(x) == floor(alpha_continuous(x)).
    double alpha_continuous(double x) const;

    // Upper bound on sum_{j>J} p_j, within one term of the exact value.
    double tail_mass(CellIndex J) const;
    // Estimate of sum_{j>J} p_j accurate to ~1e-15 absolute.
    double tail_sum(CellIndex J) const;
    // int_x^inf density(u) du.
    double tail_integral(double x) const;
    // sum_{j<=J} p_j.
    double prefix_sum(CellIndex J) const;

    // Upper bound on the probability that two of n draws share a cell at or
    // beyond kFarTailIndex.
    double far_tail_collision_bound(double n) const;

    // Returns j with probability p_j. Values >= kFarTailIndex mark far-tail
    // cells whose exact identity is not resolved.
    CellIndex sample(RandomState& rng) const;

    std::size_t table_size() const { return alias_prob_.size(); }

  private:
    double weight(double x) const;
    double weight_tail_integral(double x) const;
    void normalize();
    void build_alias_table();
    CellIndex sample_tail(RandomState& rng) const;

    DistributionSpec spec_;
    double z_ = 1.0;
    double z_err_ = 0.0;
    double theta_ = 0.0;
    std::vector<double> head_;
    std::vector<double> head_prefix_;
    // Alias table over cells 1..N plus one entry for the conditional tail.
    std::vector<double> alias_prob_;
    std::vector<std::uint32_t> alias_index_;
    unsigned table_bits_ = 0;
    CellIndex table_cells_ = 0;
};

inline double prob(CellDistribution const& d, CellIndex j) { return d.prob(j); }
inline CellIndex alpha(CellDistribution const& d, double x) { return d.alpha(x); }
inline double tail_mass(CellDistribution const& d, CellIndex J) { return d.tail_mass(J); }
inline CellIndex sample_cell(CellDistribution const& d, RandomState& rng) { return d.sample(rng); }
CellDistribution build_distribution(DistributionSpec const& spec);

// splitmix64 finalizer applied to (master, index).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace urn
