#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "urn/dist.hpp"
#include "urn/sim.hpp"

namespace urn
{

/*!
 * Study configuration, read from key-value text.
 *
 * Keys mirror the field names (family, s, a, q, normalization_tolerance for
 * the distribution). List-valued keys take comma separated values.
 */
struct ExperimentConfig
{
    DistributionSpec dist = DistributionSpec::zipf(2.0);
    std::uint64_t n_min = 10000;
    std::uint64_t n_max = 10000000;
    int points = 13;
    std::vector<int> k = {1};
    int seeds = 100;
    std::uint64_t master_seed = 42;
    int k_max = 5;
    int threads = 0;  // 0: one per hardware thread

    // theorem1
    double decay_factor = 0.5;
    double abs_threshold = 1.0;
    // corollary1
    double slack = 0.1;
    double pass_fraction = 0.95;
    // prop1
    double v_exponent = 0.6;
    std::vector<double> prop1_t = {1e4, 1e6, 1e8};
    double prop1_threshold = 0.05;
    // remark1
    double ratio_band = 0.05;
    double remark_decay = 0.1;
    // lemma2 / lemma5 / remark1: assertions apply to n >= check_floor
    std::uint64_t check_floor = 1000;

    std::string out_csv;
    std::string out_json;

    // Defaults for theorem1, corollary1, lemma2, lemma5, prop1, remark1.
    static ExperimentConfig defaults(std::string_view study);
    // Starts from `base` and applies every key in `text`.
    static ExperimentConfig from_text(std::string_view text, ExperimentConfig base);
    static ExperimentConfig from_text(std::string_view text);
    // Throws std::invalid_argument on unknown keys or bad values.
    void set(std::string_view key, std::string_view value);
    std::string to_text() const;
    void validate() const;

    CheckpointGrid grid() const;
};

struct Quantiles
{
    double median = 0;
    double q05 = 0;
    double q95 = 0;
};

// Linear-interpolation (type 7) quantiles; input order does not matter.
Quantiles quantiles(std::vector<double> values);
// per_seed[s][i] -> quantiles over s for every checkpoint i.
std::vector<Quantiles> aggregate(std::vector<std::vector<double>> const& per_seed);

struct StatRow
{
    std::string statistic;
    int k = 0;
    double n = 0;
    Quantiles q;
};

struct Check
{
    std::string name;
    bool passed = false;
    double margin = 0;  // >= 0 when passed
    std::string detail;
};

struct StudyResult
{
    std::string study;
    std::vector<StatRow> rows;
    std::vector<Check> checks;

    bool passed() const;
    // study,statistic,k,n,median,q05,q95
    std::string csv() const;
    std::string json() const;
};

struct StudyHooks
{
    // theorem1: read the poissonized slots at K_i = n_i.
    bool force_K_equal_n = false;
    // prop1: replace the Poisson path by a deterministic function of t.
    std::function<double(double)> poisson_path;
};

StudyResult study_theorem1(ExperimentConfig const& cfg, StudyHooks const& hooks = {});
// Throws std::invalid_argument for theta = 0.
StudyResult study_corollary1(ExperimentConfig const& cfg);
StudyResult study_prop1(ExperimentConfig const& cfg, StudyHooks const& hooks = {});
StudyResult study_moment_convergence(ExperimentConfig const& cfg);
StudyResult study_lemma2(ExperimentConfig const& cfg);
StudyResult study_lemma5(ExperimentConfig const& cfg);
StudyResult study_inequalities(ExperimentConfig const& cfg);

// Dispatch by name: theorem1, corollary1, lemma2, lemma5, prop1, remark1.
StudyResult run_study(std::string_view name, ExperimentConfig const& cfg);

// ln R_n / ln n at the last checkpoint, fixed-n column.
double estimate_theta(CoupledTrajectory const& trajectory);

}  // namespace urn
