#include <immintrin.h>

#include <array>

#include "urn/kernels.hpp"

namespace urn::kernels
{
namespace
{
// exp(x) for x <= 0; returns 0 below -708 where the scalar result is
// subnormal or zero.
inline __m256d exp_nonpositive(__m256d x)
{
    __m256d const log2e = _mm256_set1_pd(1.4426950408889634074);
    __m256d const ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
    __m256d const ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
    __m256d const lowest = _mm256_set1_pd(-708.0);

    __m256d const underflow = _mm256_cmp_pd(x, lowest, _CMP_LT_OQ);
    x = _mm256_max_pd(x, lowest);
    __m256d const n = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
    r = _mm256_fnmadd_pd(n, ln2_lo, r);

    // Taylor polynomial to degree 13 on |r| <= ln2/2.
    static constexpr std::array<double, 14> c = {
        1.0,
        1.0,
        1.0 / 2,
        1.0 / 6,
        1.0 / 24,
        1.0 / 120,
        1.0 / 720,
        1.0 / 5040,
        1.0 / 40320,
        1.0 / 362880,
        1.0 / 3628800,
        1.0 / 39916800,
        1.0 / 479001600,
        1.0 / 6227020800.0,
    };
    __m256d p = _mm256_set1_pd(c[13]);
    for (int i = 12; i >= 0; --i)
        p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(c[i]));

    __m128i const n32 = _mm256_cvtpd_epi32(n);
    __m256i bits = _mm256_add_epi64(_mm256_cvtepi32_epi64(n32), _mm256_set1_epi64x(1023));
    bits = _mm256_slli_epi64(bits, 52);
    __m256d const result = _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
    return _mm256_andnot_pd(underflow, result);
}

inline double hsum(__m256d v)
{
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d const hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d const swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}
}  // namespace

PoissonSums poisson_sums_avx2(std::span<double const> probs, double t, int k)
{
    std::array<double, kMaxK + 1> inv_lower{};
    for (int s = 0; s < k; ++s)
        inv_lower[s] = 1.0 / (s + 1);
    std::array<double, 25> inv_upper{};
    for (int m = 1; m <= 24; ++m)
        inv_upper[m] = 1.0 / (k + m);

    __m256d const vt = _mm256_set1_pd(t);
    __m256d const one = _mm256_set1_pd(1.0);
    __m256d const zero = _mm256_setzero_pd();
    __m256d const big = _mm256_set1_pd(800.0);

    __m256d star_mean = zero;
    __m256d star_var = zero;
    __m256d exact_mean = zero;
    __m256d exact_var = zero;

    std::size_t const n = probs.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
    {
        __m256d const y = _mm256_mul_pd(vt, _mm256_loadu_pd(probs.data() + i));
        __m256d const saturated = _mm256_cmp_pd(y, big, _CMP_GT_OQ);
        __m256d const ys = _mm256_blendv_pd(y, zero, saturated);
        __m256d const e = exp_nonpositive(_mm256_sub_pd(zero, ys));

        __m256d lower = zero;
        __m256d term = one;
        for (int s = 0; s < k; ++s)
        {
            lower = _mm256_add_pd(lower, term);
            term = _mm256_mul_pd(term, _mm256_mul_pd(ys, _mm256_set1_pd(inv_lower[s])));
        }
        __m256d lt = _mm256_mul_pd(e, lower);
        __m256d eq = _mm256_mul_pd(e, term);

        __m256d c = one;
        __m256d acc = one;
        for (int m = 1; m <= 24; ++m)
        {
            c = _mm256_mul_pd(c, _mm256_mul_pd(ys, _mm256_set1_pd(inv_upper[m])));
            acc = _mm256_add_pd(acc, c);
        }
        __m256d const series = _mm256_mul_pd(eq, acc);
        __m256d const small = _mm256_cmp_pd(ys, one, _CMP_LT_OQ);
        __m256d ge = _mm256_blendv_pd(_mm256_sub_pd(one, lt), series, small);

        lt = _mm256_blendv_pd(lt, zero, saturated);
        eq = _mm256_blendv_pd(eq, zero, saturated);
        ge = _mm256_blendv_pd(ge, one, saturated);

        star_mean = _mm256_add_pd(star_mean, ge);
        star_var = _mm256_fmadd_pd(ge, lt, star_var);
        exact_mean = _mm256_add_pd(exact_mean, eq);
        exact_var = _mm256_fmadd_pd(eq, _mm256_sub_pd(one, eq), exact_var);
    }

    PoissonSums out;
    out.star_mean = hsum(star_mean);
    out.star_var = hsum(star_var);
    out.exact_mean = hsum(exact_mean);
    out.exact_var = hsum(exact_var);
    if (i < n)
    {
        auto const rest = poisson_sums_scalar(probs.subspan(i), t, k);
        out.star_mean += rest.star_mean;
        out.star_var += rest.star_var;
        out.exact_mean += rest.exact_mean;
        out.exact_var += rest.exact_var;
    }
    return out;
}

}  // namespace urn::kernels
