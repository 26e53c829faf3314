#include <cmath>

#include "urn/kernels.hpp"

namespace urn::kernels
{

PoissonTerm poisson_term(double y, int k)
{
    PoissonTerm out;
    if (y > 800.0)
    {
        out.ge = 1.0;
        return out;
    }
    double const e = std::exp(-y);
    double lower = 0;
    double term = 1;
    for (int s = 0; s < k; ++s)
    {
        lower += term;
        term *= y / (s + 1);
    }
    out.lt = e * lower;
    out.eq = e * term;
    if (y < 1.0)
    {
        // Upper series e^{-y} y^k/k! sum_m y^m k!/(k+m)! avoids cancellation.
        double c = 1;
        double acc = 1;
        for (int m = 1; m <= 24; ++m)
        {
            c *= y / (k + m);
            acc += c;
        }
        out.ge = out.eq * acc;
    }
    else
    {
        out.ge = 1.0 - out.lt;
    }
    return out;
}

PoissonSums poisson_sums_scalar(std::span<double const> probs, double t, int k)
{
    PoissonSums s;
    for (double p : probs)
    {
        auto const term = poisson_term(t * p, k);
        s.star_mean += term.ge;
        s.star_var += term.ge * term.lt;
        s.exact_mean += term.eq;
        s.exact_var += term.eq * (1.0 - term.eq);
    }
    return s;
}

}  // namespace urn::kernels
