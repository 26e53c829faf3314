#include <cstdlib>
#include <stdexcept>
#include <string_view>

#include "urn/kernels.hpp"

namespace urn::kernels
{

std::string_view to_string(Isa isa)
{
    return isa == Isa::avx2 ? "avx2" : "scalar";
}

bool isa_supported(Isa isa)
{
    switch (isa)
    {
        case Isa::scalar: return true;
        case Isa::avx2:
#if defined(URN_HAVE_AVX2)
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
    }
    return false;
}

Isa active_isa()
{
    static Isa const isa = [] {
        if (char const* env = std::getenv("URN_SIMD"); env && std::string_view(env) == "scalar")
            return Isa::scalar;
        return isa_supported(Isa::avx2) ? Isa::avx2 : Isa::scalar;
    }();
    return isa;
}

PoissonSums poisson_sums(Isa isa, std::span<double const> probs, double t, int k)
{
    if (k < 1 || k > kMaxK)
        throw std::invalid_argument("k must lie in [1, 32]");
    if (!isa_supported(isa))
        throw std::invalid_argument("requested SIMD variant is not supported on this CPU");
#if defined(URN_HAVE_AVX2)
    if (isa == Isa::avx2)
        return poisson_sums_avx2(probs, t, k);
#endif
    return poisson_sums_scalar(probs, t, k);
}

PoissonSums poisson_sums(std::span<double const> probs, double t, int k)
{
    return poisson_sums(active_isa(), probs, t, k);
}

}  // namespace urn::kernels
