#include "urn/dist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "urn/text.hpp"

namespace urn
{
namespace
{
constexpr double kE = std::numbers::e;
constexpr unsigned kTableBits = 16;
constexpr CellIndex kMaxNormalizationTerms = CellIndex{1} << 24;

double to_unit_open(std::uint64_t bits)
{
    // (0, 1]
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

double to_unit_closed_open(std::uint64_t bits)
{
    // [0, 1)
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

template<class F>
double integrate_half_line(F&& f, double* err)
{
    using boost::math::quadrature::gauss_kronrod;
    double e = 0;
    double const v = gauss_kronrod<double, 61>::integrate(
        f, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-13, &e);
    if (err)
        *err = e;
    return v;
}

// int_{j-1/2}^{j+1/2} x^-s dx
double power_cell_integral(double j, double s)
{
    double const lo = j - 0.5;
    return std::pow(lo, 1.0 - s) * -std::expm1((1.0 - s) * std::log1p(1.0 / lo)) / (s - 1.0);
}

// int_{j-1/2}^{j+1/2} dx / ((x+e) ln^2(x+e))
double log_cell_integral(double j)
{
    double const a = std::log(j - 0.5 + kE);
    double const b = a + std::log1p(1.0 / (j - 0.5 + kE));
    return (b - a) / (a * b);
}
}  // namespace

std::string_view to_string(Family f)
{
    switch (f)
    {
        case Family::zipf: return "zipf";
        case Family::zipf_log: return "zipf_log";
        case Family::theta_one_log: return "theta_one_log";
        case Family::geometric: return "geometric";
    }
    return "?";
}

Family parse_family(std::string_view name)
{
    for (auto f : {Family::zipf, Family::zipf_log, Family::theta_one_log, Family::geometric})
    {
        if (name == to_string(f))
            return f;
    }
    throw std::invalid_argument("unknown family '" + std::string(name)
                                + "' (expected zipf, zipf_log, theta_one_log or geometric)");
}

DistributionSpec DistributionSpec::zipf(double s)
{
    DistributionSpec d;
    d.family = Family::zipf;
    d.s = s;
    d.validate();
    return d;
}

DistributionSpec DistributionSpec::zipf_log(double s, double a)
{
    DistributionSpec d;
    d.family = Family::zipf_log;
    d.s = s;
    d.a = a;
    d.validate();
    return d;
}

DistributionSpec DistributionSpec::theta_one_log()
{
    DistributionSpec d;
    d.family = Family::theta_one_log;
    return d;
}

DistributionSpec DistributionSpec::geometric(double q)
{
    DistributionSpec d;
    d.family = Family::geometric;
    d.q = q;
    d.validate();
    return d;
}

void DistributionSpec::validate() const
{
    auto const family_name = std::string(to_string(family));
    auto require_unset = [&](double v, char const* name) {
        if (v != 0.0)
            throw std::invalid_argument(std::string("parameter '") + name
                                        + "' is not used by family " + family_name);
    };
    if (!(normalization_tolerance > 0.0 && normalization_tolerance <= 1e-6))
        throw std::invalid_argument("normalization_tolerance must lie in (0, 1e-6]");
    switch (family)
    {
        case Family::zipf:
            if (!(s > 1.0) || !std::isfinite(s))
                throw std::invalid_argument("zipf requires s > 1");
            require_unset(a, "a");
            require_unset(q, "q");
            break;
        case Family::zipf_log:
            if (!(s > 1.0) || !std::isfinite(s))
                throw std::invalid_argument("zipf_log requires s > 1");
            if (!(a >= 0.0) || !std::isfinite(a))
                throw std::invalid_argument("zipf_log requires a >= 0");
            require_unset(q, "q");
            break;
        case Family::theta_one_log:
            require_unset(s, "s");
            if (a != 0.0 && a != 2.0)
                throw std::invalid_argument("theta_one_log fixes the log power at a = 2");
            require_unset(q, "q");
            break;
        case Family::geometric:
            if (!(q > 0.0 && q < 1.0))
                throw std::invalid_argument("geometric requires q in (0,1)");
            require_unset(s, "s");
            require_unset(a, "a");
            break;
    }
}

std::string DistributionSpec::to_text() const
{
    std::ostringstream os;
    os << "family = " << to_string(family) << '\n';
    if (family == Family::zipf || family == Family::zipf_log)
        os << "s = " << format_double(s) << '\n';
    if (family == Family::zipf_log)
        os << "a = " << format_double(a) << '\n';
    if (family == Family::geometric)
        os << "q = " << format_double(q) << '\n';
    os << "normalization_tolerance = " << format_double(normalization_tolerance) << '\n';
    return os.str();
}

DistributionSpec DistributionSpec::from_text(std::string_view text)
{
    DistributionSpec d;
    bool have_family = false;
    for (auto const& [key, value] : parse_key_values(text))
    {
        if (key == "family")
        {
            d.family = parse_family(value);
            have_family = true;
        }
        else if (key == "s")
            d.s = parse_double(key, value);
        else if (key == "a")
            d.a = parse_double(key, value);
        else if (key == "q")
            d.q = parse_double(key, value);
        else if (key == "normalization_tolerance")
            d.normalization_tolerance = parse_double(key, value);
        else
            throw std::invalid_argument("unknown distribution key '" + key + "'");
    }
    if (!have_family)
        throw std::invalid_argument("distribution spec is missing 'family'");
    d.validate();
    return d;
}

//---------------------------------------------------------------------------//

CellDistribution::CellDistribution(DistributionSpec spec) : spec_(spec)
{
    spec_.validate();
    switch (spec_.family)
    {
        case Family::zipf:
        case Family::zipf_log: theta_ = 1.0 / spec_.s; break;
        case Family::theta_one_log: theta_ = 1.0; break;
        case Family::geometric: theta_ = 0.0; break;
    }
    normalize();
    build_alias_table();
}

CellDistribution build_distribution(DistributionSpec const& spec)
{
    return CellDistribution(spec);
}

double CellDistribution::weight(double x) const
{
    switch (spec_.family)
    {
        case Family::zipf: return std::pow(x, -spec_.s);
        case Family::zipf_log:
            return std::pow(x, -spec_.s) * std::pow(std::log(x + kE), -spec_.a);
        case Family::theta_one_log:
        {
            double const l = std::log(x + kE);
            return 1.0 / (x * l * l);
        }
        case Family::geometric: return (1.0 - spec_.q) * std::pow(spec_.q, x - 1.0);
    }
    return 0.0;
}

double CellDistribution::weight_tail_integral(double x) const
{
    switch (spec_.family)
    {
        case Family::zipf: return std::pow(x, 1.0 - spec_.s) / (spec_.s - 1.0);
        case Family::zipf_log:
        {
            // u = x e^v
            double const s = spec_.s;
            double const a = spec_.a;
            auto f = [=](double v) {
                return std::exp((1.0 - s) * v) * std::pow(std::log(x * std::exp(v) + kE), -a);
            };
            return std::pow(x, 1.0 - s) * integrate_half_line(f, nullptr);
        }
        case Family::theta_one_log:
        {
            // 1/(u ln^2(u+e)) = 1/((u+e) ln^2(u+e)) + e/(u (u+e) ln^2(u+e));
            // the first piece has antiderivative -1/ln(u+e).
            auto f = [=](double v) {
                double const u = x * std::exp(v);
                double const l = std::log(u + kE);
                return kE / ((u + kE) * l * l);
            };
            return 1.0 / std::log(x + kE) + integrate_half_line(f, nullptr);
        }
        case Family::geometric:
            return (1.0 - spec_.q) * std::pow(spec_.q, x - 1.0) / -std::log(spec_.q);
    }
    return 0.0;
}

void CellDistribution::normalize()
{
    if (spec_.family == Family::geometric)
    {
        z_ = 1.0;
        z_err_ = 0.0;
        // Cache until the remaining mass is below 1e-18.
        auto const n = static_cast<CellIndex>(
            std::clamp(std::ceil(std::log(1e-18) / std::log(spec_.q)), 16.0, double(1 << 20)));
        head_.resize(n);
        fill_probs(1, head_);
    }
    else
    {
        // Partial sum to J plus midpoint-rule tail int_{J+1/2}^inf; the
        // midpoint error for a convex decreasing weight is about |w'|/24.
        CellIndex j_max = CellIndex{1} << kTableBits;
        long double partial = 0;
        CellIndex summed = 0;
        for (;;)
        {
            for (CellIndex j = summed + 1; j <= j_max; ++j)
                partial += weight(static_cast<double>(j));
            summed = j_max;
            double const x = static_cast<double>(j_max) + 0.5;
            double const tail = weight_tail_integral(x);
            double const h = 0.25;
            double const slope = (weight(x + h) - weight(x - h)) / (2 * h);
            double const err = std::abs(slope) / 24.0
                               + 4.0 * std::numeric_limits<double>::epsilon() * double(partial);
            z_ = static_cast<double>(partial + tail);
            z_err_ = err;
            if (err <= 0.5 * spec_.normalization_tolerance * z_)
                break;
            if (j_max >= kMaxNormalizationTerms)
                throw std::runtime_error("normalization did not reach the requested tolerance");
            j_max *= 4;
        }
        head_.resize(CellIndex{1} << kTableBits);
        fill_probs(1, head_);
    }

    head_prefix_.resize(head_.size() + 1);
    long double acc = 0;
    head_prefix_[0] = 0;
    for (std::size_t i = 0; i < head_.size(); ++i)
    {
        acc += head_[i];
        head_prefix_[i + 1] = static_cast<double>(acc);
    }
}

double CellDistribution::prob(CellIndex j) const
{
    if (j == 0)
        throw std::invalid_argument("cell index must be >= 1");
    if (j <= head_.size())
        return head_[j - 1];
    return weight(static_cast<double>(j)) / z_;
}

double CellDistribution::density(double x) const
{
    return weight(x) / z_;
}

void CellDistribution::fill_probs(CellIndex first, std::span<double> out) const
{
    if (first == 0)
        throw std::invalid_argument("cell index must be >= 1");
    double const inv_z = 1.0 / z_;
    if (spec_.family == Family::geometric)
    {
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = weight(static_cast<double>(first + i));
        return;
    }
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = weight(static_cast<double>(first + i)) * inv_z;
}

CellIndex CellDistribution::alpha(double x) const
{
    if (!(x > 0.0))
        return 0;
    double const level = 1.0 / x;
    if (prob(1) < level)
        return 0;
    // p_j >= 1/x for j <= alpha forces alpha <= x.
    constexpr double cap = 0x1.0p63;
    CellIndex lo = 1;
    CellIndex hi = x + 1.0 >= cap ? (CellIndex{1} << 63) : static_cast<CellIndex>(x) + 1;
    if (prob(hi) >= level)
        return hi;
    while (hi - lo > 1)
    {
        CellIndex const mid = lo + (hi - lo) / 2;
        if (prob(mid) >= level)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

double CellDistribution::alpha_continuous(double x) const
{
    if (!(x > 0.0))
        return 0.0;
    double const p1 = prob(1);
    if (x * p1 < 1.0)
        return x * p1;
    double const log_target = std::log(z_) - std::log(x);  // ln w(a) = ln(Z/x)
    switch (spec_.family)
    {
        case Family::zipf: return std::exp(-log_target / spec_.s);
        case Family::geometric:
            return 1.0 + std::log(x * (1.0 - spec_.q)) / -std::log(spec_.q);
        case Family::zipf_log:
        case Family::theta_one_log: break;
    }
    double const s = spec_.family == Family::zipf_log ? spec_.s : 1.0;
    double const a = spec_.family == Family::zipf_log ? spec_.a : 2.0;
    // h(v) = ln w(e^v) - ln(Z/x) is strictly decreasing in v = ln(alpha).
    auto h = [&](double v) {
        return -s * v - a * std::log(std::log(std::exp(v) + kE)) - log_target;
    };
    auto dh = [&](double v) {
        double const u = std::exp(v);
        return -s - a * u / ((u + kE) * std::log(u + kE));
    };
    double lo = 0.0;
    double hi = std::max(1.0, -log_target / s);
    while (h(hi) > 0)
        hi *= 2;
    double v = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it)
    {
        double const hv = h(v);
        if (hv > 0)
            lo = v;
        else
            hi = v;
        double next = v - hv / dh(v);
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        if (std::abs(next - v) <= 1e-15 * std::max(1.0, std::abs(v)))
        {
            v = next;
            break;
        }
        v = next;
    }
    return std::exp(v);
}

double CellDistribution::tail_integral(double x) const
{
    return weight_tail_integral(x) / z_;
}

double CellDistribution::tail_mass(CellIndex J) const
{
    if (J == 0)
        throw std::invalid_argument("tail_mass requires J >= 1");
    if (spec_.family == Family::geometric)
        return std::pow(spec_.q, static_cast<double>(J));
    // Decreasing density: sum_{j>J} p_j <= int_J^inf p(x) dx <= that sum + p_J.
    return tail_integral(static_cast<double>(J));
}

double CellDistribution::tail_sum(CellIndex J) const
{
    if (spec_.family == Family::geometric)
        return std::pow(spec_.q, static_cast<double>(J));
    if (J < head_.size())
    {
        long double acc = 0;
        for (std::size_t i = head_.size(); i > J; --i)
            acc += head_[i - 1];
        return static_cast<double>(acc + tail_sum(head_.size()));
    }
    return tail_integral(static_cast<double>(J) + 0.5);
}

double CellDistribution::prefix_sum(CellIndex J) const
{
    if (J <= head_.size())
        return head_prefix_[J];
    return 1.0 - tail_sum(J);
}

double CellDistribution::far_tail_collision_bound(double n) const
{
    // sum_{j>=M} p_j^2 <= p_M * tail_mass(M - 1)
    double const p_m = prob(kFarTailIndex);
    return 0.5 * n * n * p_m * tail_mass(kFarTailIndex - 1);
}

//---------------------------------------------------------------------------//

void CellDistribution::build_alias_table()
{
    if (spec_.family == Family::geometric)
        return;
    table_bits_ = kTableBits;
    std::size_t const size = std::size_t{1} << table_bits_;
    table_cells_ = size - 1;

    // Vose's alias method over cells 1..N and one tail entry.
    std::vector<double> mass(size);
    for (std::size_t i = 0; i < table_cells_; ++i)
        mass[i] = head_[i];
    mass[table_cells_] = tail_sum(table_cells_);
    long double total = 0;
    for (double m : mass)
        total += m;

    alias_prob_.assign(size, 1.0);
    alias_index_.resize(size);
    std::vector<double> scaled(size);
    std::vector<std::uint32_t> small;
    std::vector<std::uint32_t> large;
    for (std::size_t i = 0; i < size; ++i)
    {
        scaled[i] = static_cast<double>(mass[i] * static_cast<long double>(size) / total);
        alias_index_[i] = static_cast<std::uint32_t>(i);
        (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty())
    {
        auto const s = small.back();
        small.pop_back();
        auto const l = large.back();
        alias_prob_[s] = scaled[s];
        alias_index_[s] = l;
        scaled[l] = (scaled[l] + scaled[s]) - 1.0;
        if (scaled[l] < 1.0)
        {
            large.pop_back();
            small.push_back(l);
        }
    }
    // Leftovers are 1 up to rounding.
    for (auto i : small)
        alias_prob_[i] = 1.0;
    for (auto i : large)
        alias_prob_[i] = 1.0;
}

CellIndex CellDistribution::sample(RandomState& rng) const
{
    if (spec_.family == Family::geometric)
    {
        double const u = to_unit_open(rng());
        double const j = 1.0 + std::floor(std::log(u) / std::log(spec_.q));
        return j >= 0x1.0p62 ? kFarTailIndex : static_cast<CellIndex>(j);
    }
    auto const slot = static_cast<std::size_t>(rng() >> (64 - table_bits_));
    double const u = to_unit_closed_open(rng());
    std::size_t const pick = u < alias_prob_[slot] ? slot : alias_index_[slot];
    if (pick < table_cells_)
        return pick + 1;
    return sample_tail(rng);
}

CellIndex CellDistribution::sample_tail(RandomState& rng) const
{
    // Rejection from a continuous envelope on [N + 1/2, inf), rounded to the
    // nearest cell; the envelope's cell integral dominates the cell weight.
    double const x0 = static_cast<double>(table_cells_) + 0.5;
    double const first = static_cast<double>(table_cells_ + 1);
    for (;;)
    {
        double const v = to_unit_open(rng());
        double const u = to_unit_closed_open(rng());
        switch (spec_.family)
        {
            case Family::zipf:
            case Family::zipf_log:
            {
                double const s = spec_.s;
                double const x = x0 * std::pow(v, -1.0 / (s - 1.0));
                if (!(x < 0x1.0p62))
                    return kFarTailIndex;
                double const j = std::floor(x + 0.5);
                double ratio = std::pow(j, -s) / power_cell_integral(j, s);
                if (spec_.family == Family::zipf_log)
                {
                    ratio *= std::pow(std::log(j + kE) / std::log(first + kE), -spec_.a);
                }
                if (u < ratio)
                    return static_cast<CellIndex>(j);
                break;
            }
            case Family::theta_one_log:
            {
                double const log_x = std::log(x0 + kE) / v;
                if (!(log_x < std::log(0x1.0p62)))
                    return kFarTailIndex;
                double const x = std::exp(log_x) - kE;
                double const j = std::max(first, std::floor(x + 0.5));
                double const l = std::log(j + kE);
                double const w = 1.0 / (j * l * l);
                double const envelope = 1.0 + kE / first;
                if (u * envelope * log_cell_integral(j) < w)
                    return static_cast<CellIndex>(j);
                break;
            }
            case Family::geometric: break;
        }
    }
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index)
{
    std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace urn
