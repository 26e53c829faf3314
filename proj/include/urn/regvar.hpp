#pragma once

#include <functional>

#include "urn/dist.hpp"

namespace urn
{

struct LstarValue
{
    double value = 0.0;
    double error = 0.0;  // quadrature + endpoint truncation
};

/*!
 * Regular-variation profile alpha(x) = x^theta L(x).
 *
 * slowly_varying_L uses the exact integer counting function. The smoothed
 * transform L*(t) = int_0^inf e^{-1/y}/y L(ty) dy is integrated against a
 * continuous version of L (the step function alpha is replaced by the real
 * counting function whose floor it is); the two differ by at most 1/t.
 */
class RegVarProfile
{
  public:
    using Function = std::function<double(double)>;

    // Keeps a reference to d, which must outlive the profile.
    explicit RegVarProfile(CellDistribution const& d);

    // Profile with a user supplied L. `tail` must return int_X^inf L(x)/x dx,
    // which closes the integral beyond the last quadrature panel.
    RegVarProfile(double theta, Function L, Function tail, double L_sup);

    double theta() const { return theta_; }
    double L(double x) const;
    LstarValue lstar(double t, double rel_tol = 1e-8) const;

  private:
    double theta_;
    Function step_L_;
    Function smooth_L_;
    Function tail_;
    double L_sup_;
};

double slowly_varying_L(RegVarProfile const& p, double x);
// Throws std::invalid_argument unless theta == 1.
double lstar(RegVarProfile const& p, double t);

}  // namespace urn
