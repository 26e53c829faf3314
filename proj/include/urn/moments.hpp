#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "urn/dist.hpp"
#include "urn/regvar.hpp"

namespace urn
{

enum class Law
{
    poisson,
    binomial
};

std::string_view to_string(Law law);

// Value of an infinite cell series together with a bound on what the
// truncated head plus integral tail may miss.
struct SeriesValue
{
    double value = 0;
    double truncation_error = 0;
    std::uint64_t terms = 0;  // explicitly summed cells
};

// P(Poisson(lambda) < k)
double poisson_cdf_lt(double lambda, int k);
// P(Binomial(n, p) >= k); 0 when k > n.
double binom_tail_ge(std::uint64_t n, double p, int k);
// P(Binomial(n, p) == k)
double binom_pmf(std::uint64_t n, double p, int k);

// E R*_{.,k} (star) or E R_{.,k} at size t: Poisson(t) or Binomial(t) balls.
SeriesValue exact_mean(CellDistribution const& d, double t, int k, bool star,
                       Law law = Law::poisson);
// Var R*_{P(t),k} (star, = B*) or Var R_{P(t),k} (= B); poissonized law.
SeriesValue exact_var(CellDistribution const& d, double t, int k, bool star);
// E R^{(*)}_{n,k} - E R^{(*)}_{P(n),k}, summed term by term.
SeriesValue exact_mean_gap(CellDistribution const& d, std::uint64_t n, int k, bool star);

struct PoissonMoments
{
    SeriesValue star_mean;
    SeriesValue star_var;
    SeriesValue exact_mean;
    SeriesValue exact_var;
};

// All four poissonized moments from a single pass over the cells.
PoissonMoments exact_poisson_moments(CellDistribution const& d, double t, int k);

//---------------------------------------------------------------------------//
// Asymptotic constants

// Either c * alpha(t) or, for theta = 1 and k = 1, t L*(t).
struct AsymptoticScale
{
    enum class Kind
    {
        alpha_multiple,
        t_lstar
    };
    Kind kind = Kind::alpha_multiple;
    double coeff = 0;
};

AsymptoticScale asym_mean_coeff(double theta, int k, bool star);
// Throws std::invalid_argument for star with theta = 0.
AsymptoticScale asym_var_coeff(double theta, int k, bool star);
double asymptotic_value(AsymptoticScale scale, CellDistribution const& d,
                        RegVarProfile const& profile, double t);

//---------------------------------------------------------------------------//

struct MomentReport
{
    double t = 0;
    int k = 1;
    bool star = true;
    Law law = Law::poisson;
    double exact_mean = 0;
    double exact_var = 0;
    double asym_mean = 0;
    double asym_var = 0;  // NaN when no asymptotic is available
    double truncation_error = 0;

    static std::string csv_header();
    std::string csv_row() const;
    std::string json() const;
};

MomentReport moment_report(CellDistribution const& d, double t, int k, bool star,
                           Law law = Law::poisson);

//---------------------------------------------------------------------------//

/*!
 * Normalizing sequences for the fixed-size versus poissonized comparison.
 *
 * theta = 1 uses (n L*(n) ln ln n)^{-1/2} for k = 1 and (n L(n) ln ln n)^{-1/2}
 * for k >= 2. For theta < 1 the admissible class is o(bound(n)) with
 * bound(n) = min{n^{1/2-theta} / (L(n) ln ln n), 1/ln n}; the representative
 * used here is bound(n) / ln ln n.
 */
struct NormalizerSpec
{
    double theta = 0;
    int k = 1;
    double n_min = 16;
    std::function<double(double)> b;
    std::function<double(double)> tprime;
    // The o(.) envelope for theta < 1; equal to b for theta = 1.
    std::function<double(double)> bound;
};

// The profile must outlive the returned evaluators.
NormalizerSpec normalizer(double theta, int k, RegVarProfile const& profile);

struct Lemma2Check
{
    double lhs = 0;
    double rhs = 0;
    bool holds = false;
};

Lemma2Check lemma2_check(CellDistribution const& d, double n, double t_n, int k);

struct Lemma5Check
{
    double lower_margin = 0;   // B*_{n,k} - 2^{-k} E R_{P(2n),k}
    double upper_margin = 0;   // k E R_{P(n),k} - B*_{n,k}
    double strict_margin = 0;  // E R_{P(n),k} - B_{n,k}
    double tolerance = 0;      // combined truncation error
    bool holds = false;
};

Lemma5Check lemma5_check(CellDistribution const& d, double n, int k);

}  // namespace urn
