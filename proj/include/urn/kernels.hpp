#pragma once

#include <span>
#include <string_view>

namespace urn::kernels
{

inline constexpr int kMaxK = 32;

// Per-cell Poisson probabilities for y = t p_j.
struct PoissonTerm
{
    double ge = 0;  // P(Poisson(y) >= k)
    double lt = 0;  // P(Poisson(y) < k)
    double eq = 0;  // P(Poisson(y) == k)
};

PoissonTerm poisson_term(double y, int k);

// Sums over a block of cells of the indicator moments:
//   star_mean  = sum P(>=k)       star_var  = sum P(>=k) P(<k)
//   exact_mean = sum P(==k)       exact_var = sum P(==k) (1 - P(==k))
struct PoissonSums
{
    double star_mean = 0;
    double star_var = 0;
    double exact_mean = 0;
    double exact_var = 0;
};

enum class Isa
{
    scalar,
    avx2
};

std::string_view to_string(Isa isa);

// Reference implementation.
PoissonSums poisson_sums_scalar(std::span<double const> probs, double t, int k);
#if defined(URN_HAVE_AVX2)
// Requires AVX2 and FMA at run time.
PoissonSums poisson_sums_avx2(std::span<double const> probs, double t, int k);
#endif

// Best variant supported by this CPU; URN_SIMD=scalar forces the reference.
Isa active_isa();
bool isa_supported(Isa isa);
PoissonSums poisson_sums(std::span<double const> probs, double t, int k);
PoissonSums poisson_sums(Isa isa, std::span<double const> probs, double t, int k);

}  // namespace urn::kernels
