#include "urn/regvar.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace urn
{
namespace
{
// Below y = 1/45 the weight e^{-1/y}/y is under 1e-18.
constexpr double kLogYMin = -3.8066624897703196;  // ln(1/45)
constexpr double kLogYMax = 18.420680743952367;   // ln(1e8)
constexpr double kPanelWidth = 0.5;
}  // namespace

RegVarProfile::RegVarProfile(CellDistribution const& d) : theta_(d.theta()), L_sup_(2.0)
{
    double const theta = theta_;
    step_L_ = [&d, theta](double x) {
        return static_cast<double>(d.alpha(x)) / std::pow(x, theta);
    };
    smooth_L_ = [&d, theta](double x) { return d.alpha_continuous(x) / std::pow(x, theta); };
    // For theta = 1: int_X^inf alpha_c(x)/x^2 dx = A/X + int_A^inf p(a) da with
    // A = alpha_c(X), after substituting x = 1/p(a).
    tail_ = [&d](double X) {
        double const A = std::max(1.0, d.alpha_continuous(X));
        return A / X + d.tail_integral(A);
    };
}

RegVarProfile::RegVarProfile(double theta, Function L, Function tail, double L_sup)
    : theta_(theta), step_L_(L), smooth_L_(std::move(L)), tail_(std::move(tail)), L_sup_(L_sup)
{
}

double RegVarProfile::L(double x) const
{
    return step_L_(x);
}

LstarValue RegVarProfile::lstar(double t, double rel_tol) const
{
    if (theta_ != 1.0)
        throw std::invalid_argument("L* is only defined here for theta = 1");
    if (!(t >= 1.0))
        throw std::invalid_argument("L* requires t >= 1");

    using boost::math::quadrature::gauss_kronrod;
    // In u = ln y the integrand is e^{-1/y} L(t y).
    auto f = [&](double u) {
        double const y = std::exp(u);
        return std::exp(-1.0 / y) * smooth_L_(t * y);
    };

    LstarValue out;
    int const panels = static_cast<int>(std::ceil((kLogYMax - kLogYMin) / kPanelWidth));
    double const width = (kLogYMax - kLogYMin) / panels;
    for (int i = 0; i < panels; ++i)
    {
        double const lo = kLogYMin + i * width;
        double err = 0;
        out.value += gauss_kronrod<double, 31>::integrate(f, lo, lo + width, 12, rel_tol, &err);
        out.error += err;
    }

    // Upper end: e^{-1/y} lies in [e^{-1/Y}, 1] beyond Y.
    double const y_max = std::exp(kLogYMax);
    double const T = tail_(t * y_max);
    double const shrink = -std::expm1(-1.0 / y_max);
    out.value += T * (1.0 - 0.5 * shrink);
    out.error += 0.5 * T * shrink;

    // Lower end: int_0^a e^{-1/y}/y dy = E1(1/a) <= a e^{-1/a}.
    double const y_min = std::exp(kLogYMin);
    out.error += L_sup_ * y_min * std::exp(-1.0 / y_min);
    return out;
}

double slowly_varying_L(RegVarProfile const& p, double x)
{
    return p.L(x);
}

double lstar(RegVarProfile const& p, double t)
{
    return p.lstar(t).value;
}

}  // namespace urn
