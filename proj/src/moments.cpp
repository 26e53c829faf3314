#include "urn/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "json.hpp"
#include "urn/kernels.hpp"
#include "urn/text.hpp"

namespace urn
{
namespace
{
// Cells with t p_j below this are handled by the integral tail.
constexpr double kTailStart = 0.05;
// Beyond this many cells the terms vary slowly enough for the integral tail
// even where t p_j is large (theta = 1 has alpha(t) near t / ln^2 t).
constexpr CellIndex kHeadCap = CellIndex{1} << 22;
constexpr std::size_t kBlock = 4096;
constexpr double kHeadRounding = 1e-13;

void check_k(int k)
{
    if (k < 1 || k > kernels::kMaxK)
        throw std::invalid_argument("k must lie in [1, 32]");
}

CellIndex head_length(CellDistribution const& d, double t)
{
    if (d.family() == Family::geometric)
    {
        double const q = d.spec().q;
        double const j = std::ceil(std::log(1e-18 / std::max(t, 1.0)) / std::log(q));
        return static_cast<CellIndex>(std::max(16.0, j));
    }
    // The cached head is free to read and keeps the midpoint error small at small t.
    CellIndex const wanted = std::min(d.alpha(t / kTailStart), kHeadCap);
    return std::max<CellIndex>(d.cached_probs().size(), wanted);
}

// Calls fn(block) over p_1..p_J in blocks.
template<class F>
void for_each_block(CellDistribution const& d, CellIndex J, F&& fn)
{
    auto const cached = d.cached_probs();
    auto const upto = std::min<CellIndex>(J, cached.size());
    for (CellIndex j0 = 0; j0 < upto; j0 += kBlock)
        fn(cached.subspan(j0, std::min<CellIndex>(kBlock, upto - j0)));
    std::vector<double> buf(kBlock);
    for (CellIndex j = upto + 1; j <= J; j += kBlock)
    {
        auto const n = std::min<CellIndex>(kBlock, J - j + 1);
        auto block = std::span<double>(buf).first(n);
        d.fill_probs(j, block);
        fn(std::span<double const>(block));
    }
}

struct TailValue
{
    double value = 0;
    double error = 0;
};

/*!
 * sum_{j>J} g(p_j) for a term function with g(p) = c1 t p + O(p^2).
 *
 * Midpoint rule: sum_{j>J} f(j) ~ int_{J+1/2}^inf f(x) dx with error about
 * |f'|/24 at the start of the tail. The linear part integrates in closed
 * form through the distribution's tail integral; the remainder decays at
 * least like p^2 and is integrated numerically in v = ln(x / X).
 */
template<class G>
TailValue integral_tail(CellDistribution const& d, CellIndex J, double t, double c1, G&& g)
{
    TailValue out;
    if (d.family() == Family::geometric)
    {
        // Every term is at most 2 t p_j.
        out.error = 2.0 * t * d.tail_mass(J);
        return out;
    }
    double const X = static_cast<double>(J) + 0.5;
    double const linear = c1 * t * d.tail_integral(X);
    auto residual = [&](double v) {
        double const x = X * std::exp(v);
        if (!std::isfinite(x))
            return 0.0;
        double const p = d.density(x);
        if (!(p > 0))
            return 0.0;
        return (g(p) - c1 * t * p) * x;
    };
    using boost::math::quadrature::gauss_kronrod;
    double quad_err = 0;
    double const rest = gauss_kronrod<double, 61>::integrate(
        residual, 0.0, std::numeric_limits<double>::infinity(), 6, 1e-10, &quad_err);
    double const f_hi = g(d.density(X + 0.5));
    double const f_lo = g(d.density(X - 0.5));
    out.value = linear + rest;
    out.error = quad_err + 2.0 * std::abs(f_lo - f_hi) / 24.0
                + 4.0 * std::numeric_limits<double>::epsilon() * std::abs(linear);
    return out;
}

SeriesValue finish(long double head, TailValue tail, CellIndex J)
{
    SeriesValue out;
    out.value = static_cast<double>(head + tail.value);
    out.truncation_error = tail.error + kHeadRounding * std::abs(static_cast<double>(head));
    out.terms = J;
    return out;
}

// Generic scalar series sum_j g(p_j).
template<class G>
SeriesValue scalar_series(CellDistribution const& d, double t, double c1, G&& g)
{
    CellIndex const J = head_length(d, t);
    long double head = 0;
    for_each_block(d, J, [&](std::span<double const> block) {
        double s = 0;
        for (double p : block)
            s += g(p);
        head += s;
    });
    return finish(head, integral_tail(d, J, t, c1, g), J);
}

std::uint64_t require_count(double t)
{
    if (!(t >= 0) || t != std::floor(t) || t > 9.0e15)
        throw std::invalid_argument("binomial law requires an integer number of balls");
    return static_cast<std::uint64_t>(t);
}

void check_theta(double theta)
{
    if (!(theta >= 0.0 && theta <= 1.0))
        throw std::invalid_argument("theta must lie in [0, 1]");
}

double log_log(double n)
{
    return std::log(std::log(n));
}
}  // namespace

std::string_view to_string(Law law)
{
    return law == Law::poisson ? "poisson" : "binomial";
}

double poisson_cdf_lt(double lambda, int k)
{
    if (k < 1)
        throw std::invalid_argument("k must be >= 1");
    if (!(lambda >= 0))
        throw std::invalid_argument("lambda must be >= 0");
    if (lambda == 0)
        return 1.0;
    return boost::math::gamma_q(static_cast<double>(k), lambda);
}

double binom_tail_ge(std::uint64_t n, double p, int k)
{
    if (k < 1)
        throw std::invalid_argument("k must be >= 1");
    if (static_cast<std::uint64_t>(k) > n)
        return 0.0;
    if (p <= 0)
        return 0.0;
    if (p >= 1)
        return 1.0;
    return boost::math::ibeta(static_cast<double>(k), static_cast<double>(n - k + 1), p);
}

double binom_pmf(std::uint64_t n, double p, int k)
{
    if (k < 0 || static_cast<std::uint64_t>(k) > n)
        return 0.0;
    if (p <= 0)
        return k == 0 ? 1.0 : 0.0;
    boost::math::binomial_distribution<double> dist(static_cast<double>(n), std::min(p, 1.0));
    return boost::math::pdf(dist, static_cast<double>(k));
}

PoissonMoments exact_poisson_moments(CellDistribution const& d, double t, int k)
{
    check_k(k);
    if (!(t >= 0))
        throw std::invalid_argument("t must be >= 0");
    PoissonMoments out;
    if (t == 0)
        return out;

    CellIndex const J = head_length(d, t);
    long double sm = 0, sv = 0, em = 0, ev = 0;
    for_each_block(d, J, [&](std::span<double const> block) {
        auto const s = kernels::poisson_sums(block, t, k);
        sm += s.star_mean;
        sv += s.star_var;
        em += s.exact_mean;
        ev += s.exact_var;
    });

    double const c1 = k == 1 ? 1.0 : 0.0;
    auto term = [t, k](double p) { return kernels::poisson_term(t * p, k); };
    out.star_mean = finish(sm, integral_tail(d, J, t, c1, [&](double p) { return term(p).ge; }), J);
    out.star_var = finish(
        sv, integral_tail(d, J, t, c1, [&](double p) {
            auto const x = term(p);
            return x.ge * x.lt;
        }),
        J);
    out.exact_mean = finish(em, integral_tail(d, J, t, c1, [&](double p) { return term(p).eq; }), J);
    out.exact_var = finish(
        ev, integral_tail(d, J, t, c1, [&](double p) {
            auto const x = term(p);
            return x.eq * (1.0 - x.eq);
        }),
        J);
    return out;
}

SeriesValue exact_mean(CellDistribution const& d, double t, int k, bool star, Law law)
{
    check_k(k);
    if (law == Law::poisson)
    {
        auto const m = exact_poisson_moments(d, t, k);
        return star ? m.star_mean : m.exact_mean;
    }
    auto const n = require_count(t);
    if (n == 0)
        return {};
    double const c1 = k == 1 ? 1.0 : 0.0;
    if (star)
        return scalar_series(d, t, c1, [n, k](double p) { return binom_tail_ge(n, p, k); });
    return scalar_series(d, t, c1, [n, k](double p) { return binom_pmf(n, p, k); });
}

SeriesValue exact_var(CellDistribution const& d, double t, int k, bool star)
{
    auto const m = exact_poisson_moments(d, t, k);
    return star ? m.star_var : m.exact_var;
}

SeriesValue exact_mean_gap(CellDistribution const& d, std::uint64_t n, int k, bool star)
{
    check_k(k);
    if (n == 0)
        return {};
    double const t = static_cast<double>(n);
    double const kd = static_cast<double>(k);
    if (star)
    {
        return scalar_series(d, t, 0.0, [=](double p) {
            double const pois = p * t == 0 ? 0.0 : boost::math::gamma_p(kd, t * p);
            return binom_tail_ge(n, p, k) - pois;
        });
    }
    return scalar_series(d, t, 0.0, [=](double p) {
        double const y = t * p;
        double const pois = kernels::poisson_term(y, k).eq;
        return binom_pmf(n, p, k) - pois;
    });
}

//---------------------------------------------------------------------------//

AsymptoticScale asym_mean_coeff(double theta, int k, bool star)
{
    check_theta(theta);
    check_k(k);
    using Kind = AsymptoticScale::Kind;
    if (theta == 1.0 && k == 1)
        return {Kind::t_lstar, 1.0};
    if (star)
    {
        if (theta == 0.0)
            return {Kind::alpha_multiple, 1.0};
        // theta sum_{i>=k} Gamma(i-theta)/i! telescopes to Gamma(k-theta)/(k-1)!
        return {Kind::alpha_multiple, boost::math::tgamma_ratio(k - theta, double(k))};
    }
    if (theta == 0.0)
        return {Kind::alpha_multiple, 0.0};
    return {Kind::alpha_multiple, theta * boost::math::tgamma_ratio(k - theta, double(k + 1))};
}

AsymptoticScale asym_var_coeff(double theta, int k, bool star)
{
    check_theta(theta);
    check_k(k);
    using Kind = AsymptoticScale::Kind;
    if (star && theta == 0.0)
        throw std::invalid_argument("no variance asymptotic for R* at theta = 0");
    if (theta == 1.0 && k == 1)
        return {Kind::t_lstar, 1.0};
    using boost::math::tgamma;
    if (!star)
    {
        if (theta == 0.0)
            return {Kind::alpha_multiple, 0.0};
        double const kf = tgamma(k + 1.0);
        double const bracket
            = tgamma(k - theta) - tgamma(2.0 * k - theta) / (std::pow(2.0, 2.0 * k - theta) * kf);
        return {Kind::alpha_multiple, theta / kf * bracket};
    }
    if (k == 1)
        return {Kind::alpha_multiple, tgamma(1.0 - theta) * (std::pow(2.0, theta) - 1.0)};
    double c = std::pow(2.0, theta) * tgamma(2.0 - theta) - boost::math::tgamma_ratio(k - theta, double(k));
    double cross = 0;
    for (int s = 0; s < k; ++s)
    {
        for (int m = 0; m < k; ++m)
        {
            int const r = s + m;
            if (r < 2)
                continue;
            cross += tgamma(r - theta)
                     / (std::pow(2.0, r - theta) * tgamma(s + 1.0) * tgamma(m + 1.0));
        }
    }
    c -= theta * cross;
    return {Kind::alpha_multiple, c};
}

double asymptotic_value(AsymptoticScale scale, CellDistribution const& d,
                        RegVarProfile const& profile, double t)
{
    if (scale.kind == AsymptoticScale::Kind::t_lstar)
        return t * profile.lstar(t).value;
    return scale.coeff * static_cast<double>(d.alpha(t));
}

//---------------------------------------------------------------------------//

std::string MomentReport::csv_header()
{
    return "t,k,star,exact_mean,exact_var,asym_mean,asym_var,trunc_err";
}

std::string MomentReport::csv_row() const
{
    std::ostringstream os;
    os << format_double(t) << ',' << k << ',' << (star ? 1 : 0) << ',' << format_double(exact_mean)
       << ',' << format_double(exact_var) << ',' << format_double(asym_mean) << ','
       << format_double(asym_var) << ',' << format_double(truncation_error);
    return os.str();
}

std::string MomentReport::json() const
{
    auto num = [](double x) -> nlohmann::json {
        if (std::isfinite(x))
            return x;
        return nullptr;
    };
    nlohmann::json j;
    j["schema_version"] = 1;
    j["t"] = t;
    j["k"] = k;
    j["star"] = star;
    j["law"] = std::string(to_string(law));
    j["exact_mean"] = num(exact_mean);
    j["exact_var"] = num(exact_var);
    j["asym_mean"] = num(asym_mean);
    j["asym_var"] = num(asym_var);
    j["trunc_err"] = num(truncation_error);
    return j.dump(2);
}

MomentReport moment_report(CellDistribution const& d, double t, int k, bool star, Law law)
{
    MomentReport r;
    r.t = t;
    r.k = k;
    r.star = star;
    r.law = law;
    auto const pm = exact_poisson_moments(d, t, k);
    auto const mean = law == Law::poisson ? (star ? pm.star_mean : pm.exact_mean)
                                          : exact_mean(d, t, k, star, law);
    auto const var = star ? pm.star_var : pm.exact_var;
    r.exact_mean = mean.value;
    r.exact_var = var.value;
    r.truncation_error = std::max(mean.truncation_error, var.truncation_error);

    RegVarProfile const profile(d);
    double const theta = d.theta();
    bool const need_lstar = theta == 1.0;
    double const at = t >= 1.0 || !need_lstar ? t : 1.0;
    r.asym_mean = asymptotic_value(asym_mean_coeff(theta, k, star), d, profile, at);
    if (star && theta == 0.0)
        r.asym_var = std::numeric_limits<double>::quiet_NaN();
    else
        r.asym_var = asymptotic_value(asym_var_coeff(theta, k, star), d, profile, at);
    return r;
}

//---------------------------------------------------------------------------//

NormalizerSpec normalizer(double theta, int k, RegVarProfile const& profile)
{
    check_theta(theta);
    check_k(k);
    NormalizerSpec spec;
    spec.theta = theta;
    spec.k = k;
    auto guard = [](double n) {
        if (!(n >= 16.0))
            throw std::invalid_argument("normalizers require n >= 16");
    };
    RegVarProfile const* p = &profile;
    if (theta == 1.0)
    {
        // The scale is n L*(n) for k = 1 and n L(n) = alpha(n) for k >= 2.
        auto scale = [p, k](double n) { return k == 1 ? p->lstar(n).value : p->L(n); };
        spec.b = [=](double n) {
            guard(n);
            return 1.0 / std::sqrt(n * scale(n) * log_log(n));
        };
        spec.bound = spec.b;
        spec.tprime = [=](double n) {
            guard(n);
            return std::sqrt(n * log_log(n)) * std::pow(scale(n), -0.25);
        };
        return spec;
    }
    spec.bound = [=](double n) {
        guard(n);
        double const ll = log_log(n);
        return std::min(std::pow(n, 0.5 - theta) / (p->L(n) * ll), 1.0 / std::log(n));
    };
    auto bound = spec.bound;
    spec.b = [=](double n) { return bound(n) / log_log(n); };
    spec.tprime = [=](double n) {
        guard(n);
        return std::sqrt(n) * log_log(n);
    };
    return spec;
}

Lemma2Check lemma2_check(CellDistribution const& d, double n, double t_n, int k)
{
    if (!(std::abs(t_n) < n))
        throw std::invalid_argument("lemma2_check requires |t_n| < n");
    Lemma2Check out;
    double const base = exact_mean(d, n, k, true).value;
    double const shifted = t_n == 0 ? base : exact_mean(d, n + t_n, k, true).value;
    out.lhs = std::abs(shifted - base);
    out.rhs = 2.0 * std::abs(t_n) / n * base;
    out.holds = out.lhs <= out.rhs;
    return out;
}

Lemma5Check lemma5_check(CellDistribution const& d, double n, int k)
{
    if (!(n >= 1))
        throw std::invalid_argument("lemma5_check requires n >= 1");
    auto const at_n = exact_poisson_moments(d, n, k);
    auto const at_2n = exact_mean(d, 2.0 * n, k, false);
    double const b_star = at_n.star_var.value;
    double const b = at_n.exact_var.value;
    double const mean_k = at_n.exact_mean.value;

    Lemma5Check out;
    out.lower_margin = b_star - std::ldexp(at_2n.value, -k);
    out.upper_margin = k * mean_k - b_star;
    out.strict_margin = mean_k - b;
    out.tolerance = at_n.star_var.truncation_error + at_n.exact_var.truncation_error
                    + k * at_n.exact_mean.truncation_error + at_2n.truncation_error;
    out.holds = out.lower_margin >= -out.tolerance && out.upper_margin >= -out.tolerance
                && out.strict_margin > 0;
    return out;
}

}  // namespace urn
