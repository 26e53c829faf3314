#include "urn/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "urn/experiments.hpp"
#include "urn/moments.hpp"
#include "urn/regvar.hpp"
#include "urn/sim.hpp"
#include "urn/text.hpp"

namespace urn::cli
{
namespace
{
namespace fs = std::filesystem;

constexpr char const* kTrajectoryHeader
    = "seed,n,K,k,rstar_fixed,rstar_poisson,r_fixed,r_poisson,b_n,scaled_diff";

// Output written next to its destination and renamed into place on commit;
// an uncommitted file is removed.
class AtomicFile
{
  public:
    explicit AtomicFile(fs::path path) : path_(std::move(path)), tmp_(path_)
    {
        tmp_ += ".partial";
        if (path_.has_parent_path())
            fs::create_directories(path_.parent_path());
        os_.open(tmp_, std::ios::binary | std::ios::trunc);
        if (!os_)
            throw std::runtime_error("cannot open " + tmp_.string() + " for writing");
    }
    AtomicFile(AtomicFile const&) = delete;
    AtomicFile& operator=(AtomicFile const&) = delete;
    ~AtomicFile()
    {
        if (!committed_)
        {
            os_.close();
            std::error_code ec;
            fs::remove(tmp_, ec);
        }
    }

    std::ostream& stream() { return os_; }

    void commit()
    {
        os_.close();
        if (!os_)
            throw std::runtime_error("write to " + tmp_.string() + " failed");
        fs::rename(tmp_, path_);
        committed_ = true;
    }

  private:
    fs::path path_;
    fs::path tmp_;
    std::ofstream os_;
    bool committed_ = false;
};

std::optional<fs::path> default_out_dir()
{
    if (char const* env = std::getenv("OCCUPANCY_OUT_DIR"); env && *env)
        return fs::path(env);
    return std::nullopt;
}

fs::path resolve(std::string const& path)
{
    fs::path p(path);
    if (p.is_relative())
    {
        if (auto dir = default_out_dir())
            return *dir / p;
    }
    return p;
}

void write_output(std::string const& path, std::string const& text)
{
    AtomicFile f(resolve(path));
    f.stream() << text;
    f.commit();
}

struct DistFlags
{
    std::string family = "zipf";
    double s = 0;
    double a = 0;
    double q = 0;

    void add(CLI::App& app)
    {
        app.add_option("--family", family, "zipf | zipf_log | theta_one_log | geometric")
            ->capture_default_str();
        app.add_option("--s", s, "exponent (zipf, zipf_log)");
        app.add_option("--a", a, "log power (zipf_log)");
        app.add_option("--q", q, "ratio (geometric)");
    }

    DistributionSpec spec() const
    {
        DistributionSpec d;
        d.family = parse_family(family);
        d.s = s;
        d.a = a;
        d.q = q;
        if (d.family == Family::zipf && s == 0)
            d.s = 2.0;
        d.validate();
        return d;
    }
};

//---------------------------------------------------------------------------//

int cmd_moments(DistFlags const& df, double t, int k, bool star, std::string const& law_name,
                bool json, std::string const& out_path, std::ostream& out)
{
    auto const d = build_distribution(df.spec());
    Law law;
    if (law_name == "poisson")
        law = Law::poisson;
    else if (law_name == "binomial")
        law = Law::binomial;
    else
        throw std::invalid_argument("--law must be poisson or binomial");
    auto const report = moment_report(d, t, k, star, law);
    std::string text = json ? report.json() + "\n"
                            : MomentReport::csv_header() + "\n" + report.csv_row() + "\n";
    if (out_path.empty())
        out << text;
    else
        write_output(out_path, text);
    return 0;
}

struct SimulateFlags
{
    std::uint64_t n_min = 16;
    std::uint64_t n_max = 100000;
    int points = 10;
    int seeds = 1;
    int k_max = 5;
    std::uint64_t seed = 42;
    std::string out;
};

void write_trajectories(CellDistribution const& d, SimulateFlags const& f, std::ostream& os)
{
    RegVarProfile const profile(d);
    auto grid = CheckpointGrid::log_spaced(f.n_min, f.n_max, f.points, f.k_max);
    std::vector<NormalizerSpec> norms;
    for (int k = 1; k <= f.k_max; ++k)
        norms.push_back(normalizer(d.theta(), k, profile));
    std::vector<std::vector<double>> b(f.k_max);
    for (int k = 1; k <= f.k_max; ++k)
        for (auto n : grid.n)
            b[k - 1].push_back(norms[k - 1].b(static_cast<double>(n)));

    os << kTrajectoryHeader << '\n';
    for (int s = 0; s < f.seeds; ++s)
    {
        auto const seed = derive_seed(f.seed, static_cast<std::uint64_t>(s));
        auto const tr = run_coupled(d, grid, seed);
        for (std::size_t i = 0; i < tr.rows.size(); ++i)
        {
            auto const& row = tr.rows[i];
            for (int k = 1; k <= f.k_max; ++k)
            {
                auto const fx = row.rstar_fixed[k - 1];
                auto const px = row.rstar_poisson[k - 1];
                double const diff = std::abs(static_cast<double>(fx) - static_cast<double>(px));
                double const bn = b[k - 1][i];
                os << seed << ',' << row.n << ',' << row.K << ',' << k << ',' << fx << ',' << px << ','
                   << row.r_fixed[k - 1] << ',' << row.r_poisson[k - 1] << ',' << format_double(bn)
                   << ',' << format_double(bn * diff) << '\n';
            }
        }
    }
}

int cmd_simulate(DistFlags const& df, SimulateFlags const& f, std::ostream& out)
{
    if (f.n_min < 16)
        throw std::invalid_argument("--n-min must be >= 16 (normalizers need ln ln n > 0)");
    if (f.seeds < 1)
        throw std::invalid_argument("--seeds must be >= 1");
    auto const d = build_distribution(df.spec());
    if (!f.out.empty())
    {
        AtomicFile file(resolve(f.out));
        write_trajectories(d, f, file.stream());
        file.commit();
    }
    else if (auto dir = default_out_dir())
    {
        AtomicFile file(*dir / "trajectories.csv");
        write_trajectories(d, f, file.stream());
        file.commit();
    }
    else
    {
        write_trajectories(d, f, out);
    }
    return 0;
}

int cmd_verify(std::string const& study, std::string const& config,
               std::vector<std::string> const& overrides, std::string out_csv,
               std::string out_json, std::ostream& out)
{
    auto cfg = ExperimentConfig::defaults(study);
    if (!config.empty() && config != "default")
        cfg = ExperimentConfig::from_text(read_file(config), cfg);
    for (auto const& kv : overrides)
    {
        auto const eq = kv.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
        auto trim = [](std::string s) {
            auto const b = s.find_first_not_of(" \t");
            auto const e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        cfg.set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
    }
    if (out_csv.empty())
        out_csv = cfg.out_csv;
    if (out_json.empty())
        out_json = cfg.out_json;
    if (out_csv.empty() && out_json.empty() && default_out_dir())
    {
        out_csv = study + ".csv";
        out_json = study + ".json";
    }

    auto const result = run_study(study, cfg);
    if (!out_csv.empty())
        write_output(out_csv, result.csv());
    if (!out_json.empty())
        write_output(out_json, result.json());

    for (auto const& c : result.checks)
    {
        out << (c.passed ? "PASS " : "FAIL ") << c.name << " margin=" << format_double(c.margin);
        if (!c.detail.empty())
            out << " (" << c.detail << ")";
        out << '\n';
    }
    out << study << ": " << (result.passed() ? "pass" : "fail") << '\n';
    return result.passed() ? 0 : 1;
}

int cmd_estimate_theta(std::string const& in_path, std::ostream& out)
{
    std::istringstream in(read_file(in_path));
    std::string line;
    if (!std::getline(in, line) || line != kTrajectoryHeader)
        throw std::invalid_argument(in_path + ": expected trajectory CSV header");

    // seed -> trajectory assembled from the k = 1 rows, in file order.
    std::map<std::uint64_t, CoupledTrajectory> by_seed;
    std::vector<std::uint64_t> order;
    std::size_t line_no = 1;
    while (std::getline(in, line))
    {
        ++line_no;
        if (line.empty())
            continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');)
            cells.push_back(cell);
        if (cells.size() != 10)
            throw std::invalid_argument(in_path + ":" + std::to_string(line_no) + ": expected 10 fields");
        auto field = [&](int i) {
            std::uint64_t v = 0;
            auto const& c = cells[i];
            auto const [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
            if (ec != std::errc() || ptr != c.data() + c.size())
                throw std::invalid_argument(in_path + ":" + std::to_string(line_no)
                                            + ": bad integer '" + c + "'");
            return v;
        };
        if (field(3) != 1)
            continue;
        auto const seed = field(0);
        auto [it, inserted] = by_seed.try_emplace(seed);
        if (inserted)
        {
            it->second.seed = seed;
            it->second.k_max = 1;
            order.push_back(seed);
        }
        CoupledRow row;
        row.n = field(1);
        row.K = field(2);
        row.rstar_fixed = {field(4)};
        row.rstar_poisson = {field(5)};
        row.r_fixed = {field(6)};
        row.r_poisson = {field(7)};
        it->second.rows.push_back(std::move(row));
    }
    if (order.empty())
        throw std::invalid_argument(in_path + ": no trajectory rows");
    out << "seed,n,theta_hat\n";
    for (auto seed : order)
    {
        auto const& tr = by_seed.at(seed);
        out << seed << ',' << tr.rows.back().n << ',' << format_double(estimate_theta(tr)) << '\n';
    }
    return 0;
}
}  // namespace

int run(std::vector<std::string> const& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Infinite occupancy scheme: exact moments, coupled simulation, verification studies"};
    app.require_subcommand(1);
    app.name(args.empty() ? "urn" : args.front());

    DistFlags moments_dist;
    double t = 0;
    int k = 1;
    bool star = false;
    std::string law = "poisson";
    bool json = false;
    std::string moments_out;
    auto* moments = app.add_subcommand("moments", "exact and asymptotic moments at one t");
    moments_dist.add(*moments);
    moments->add_option("--t", t, "size (mean of the Poisson law, or n)")->required();
    moments->add_option("--k", k, "occupancy level")->capture_default_str();
    moments->add_flag("--star", star, "R* (at least k) instead of R (exactly k)");
    moments->add_option("--law", law, "poisson | binomial")->capture_default_str();
    moments->add_flag("--json", json, "print the JSON summary instead of CSV");
    moments->add_option("--out", moments_out, "output file");

    DistFlags sim_dist;
    SimulateFlags sf;
    auto* simulate = app.add_subcommand("simulate", "coupled fixed-n / poissonized trajectories");
    sim_dist.add(*simulate);
    simulate->add_option("--n-min", sf.n_min, "first checkpoint (>= 16)")->capture_default_str();
    simulate->add_option("--n-max", sf.n_max, "last checkpoint")->capture_default_str();
    simulate->add_option("--points", sf.points, "log-spaced checkpoints")->capture_default_str();
    simulate->add_option("--seeds", sf.seeds, "number of trajectories")->capture_default_str();
    simulate->add_option("--k-max", sf.k_max, "largest k tracked")->capture_default_str();
    simulate->add_option("--seed", sf.seed, "master seed")->capture_default_str();
    simulate->add_option("--out", sf.out, "output CSV");

    std::string study, config, out_csv, out_json;
    std::vector<std::string> overrides;
    auto* verify = app.add_subcommand("verify", "run a study; exit 0 iff every check passes");
    verify->add_option("study", study, "theorem1 | corollary1 | lemma2 | lemma5 | prop1 | remark1")
        ->required()
        ->check(CLI::IsMember({"theorem1", "corollary1", "lemma2", "lemma5", "prop1", "remark1"}));
    verify->add_option("--config", config, "config file, or 'default'")->required();
    verify->add_option("--set", overrides, "override a config key (key=value)");
    verify->add_option("--out-csv", out_csv, "statistics table");
    verify->add_option("--out-json", out_json, "JSON summary");

    std::string traj_in;
    auto* estimate = app.add_subcommand("estimate-theta", "ln R_n / ln n from a trajectory CSV");
    estimate->add_option("--in", traj_in, "trajectory CSV from simulate")->required();

    try
    {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        if (!rev.empty())
            rev.pop_back();
        app.parse(std::move(rev));
    }
    catch (CLI::ParseError const& e)
    {
        return app.exit(e, out, err) == 0 ? 0 : 2;
    }

    try
    {
        if (*moments)
            return cmd_moments(moments_dist, t, k, star, law, json, moments_out, out);
        if (*simulate)
            return cmd_simulate(sim_dist, sf, out);
        if (*verify)
            return cmd_verify(study, config, overrides, out_csv, out_json, out);
        if (*estimate)
            return cmd_estimate_theta(traj_in, out);
    }
    catch (std::exception const& e)
    {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}

}  // namespace urn::cli
