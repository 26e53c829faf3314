#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "urn/cli.hpp"

namespace fs = std::filesystem;

namespace
{
struct Result
{
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args)
{
    args.insert(args.begin(), "occupancy");
    std::ostringstream out, err;
    int const code = urn::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(fs::path const& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class TempDir
{
  public:
    TempDir()
    {
        auto const* info = ::testing::UnitTest::GetInstance()->current_test_info();
        path_ = fs::temp_directory_path() / (std::string("occupancy_") + info->name());
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    fs::path const& path() const { return path_; }

  private:
    fs::path path_;
};
}  // namespace

TEST(Cli, MomentsCsv)
{
    auto const r = run({"moments", "--family", "zipf", "--s", "2", "--t", "1e4", "--k", "2", "--star"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')),
              "t,k,star,exact_mean,exact_var,asym_mean,asym_var,trunc_err");
    EXPECT_NE(r.out.find("\n10000,2,1,"), std::string::npos) << r.out;
}

TEST(Cli, MomentsJson)
{
    auto const r = run({"moments", "--family", "geometric", "--q", "0.5", "--t", "100", "--json"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("\"schema_version\""), std::string::npos);
}

TEST(Cli, UsageErrors)
{
    EXPECT_EQ(run({"moments", "--t", "10", "--bogus"}).code, 2);
    EXPECT_EQ(run({"moments"}).code, 2);
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"moments", "--family", "zipf", "--s", "0.5", "--t", "10"}).code, 2);
    EXPECT_EQ(run({"verify", "nosuch", "--config", "default"}).code, 2);
    EXPECT_EQ(run({"estimate-theta", "--in", "/nonexistent/file.csv"}).code, 2);
    EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, SimulateReproducible)
{
    TempDir dir;
    auto const a = dir.path() / "a.csv";
    auto const b = dir.path() / "b.csv";
    std::vector<std::string> common = {"simulate", "--family", "zipf", "--n-min", "16", "--n-max",
                                       "20000", "--points", "4", "--seeds", "3", "--seed", "11"};
    auto args_a = common;
    args_a.insert(args_a.end(), {"--out", a.string()});
    auto args_b = common;
    args_b.insert(args_b.end(), {"--out", b.string()});
    ASSERT_EQ(run(args_a).code, 0);
    ASSERT_EQ(run(args_b).code, 0);
    auto const text = slurp(a);
    EXPECT_EQ(text, slurp(b));
    EXPECT_EQ(text.substr(0, text.find('\n')),
              "seed,n,K,k,rstar_fixed,rstar_poisson,r_fixed,r_poisson,b_n,scaled_diff");
    // 3 seeds x 4 checkpoints x 5 levels, plus the header.
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 61);

    auto const est = run({"estimate-theta", "--in", a.string()});
    ASSERT_EQ(est.code, 0) << est.err;
    EXPECT_EQ(est.out.substr(0, est.out.find('\n')), "seed,n,theta_hat");
}

TEST(Cli, SimulateRejectsSmallN)
{
    EXPECT_EQ(run({"simulate", "--n-min", "8", "--n-max", "100"}).code, 2);
}

TEST(Cli, FailedWriteLeavesNoFile)
{
    TempDir dir;
    auto const target = dir.path() / "traj.csv";
    auto const r = run({"simulate", "--n-min", "16", "--n-max", "1000", "--k-max", "0", "--out",
                        target.string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_FALSE(fs::exists(target));
    EXPECT_FALSE(fs::exists(target.string() + ".partial"));
}

TEST(Cli, VerifyLemma2Default)
{
    auto const r = run({"verify", "lemma2", "--config", "default"});
    EXPECT_EQ(r.code, 0) << r.out << r.err;
    EXPECT_NE(r.out.find("lemma2: pass"), std::string::npos) << r.out;
    EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST(Cli, VerifyOverridesAndConfigFile)
{
    TempDir dir;
    auto const cfg = dir.path() / "study.cfg";
    std::ofstream(cfg) << "family = geometric\nq = 0.5\nn_max = 1e4\npoints = 5\n";
    auto const csv = dir.path() / "out.csv";
    auto const r = run({"verify", "lemma5", "--config", cfg.string(), "--set", "k=1,2", "--out-csv",
                        csv.string()});
    EXPECT_EQ(r.code, 0) << r.out << r.err;
    EXPECT_TRUE(fs::exists(csv));
    EXPECT_EQ(run({"verify", "lemma5", "--config", cfg.string(), "--set", "nonsense"}).code, 2);
}

TEST(Cli, OutDirEnvironment)
{
    TempDir dir;
    ::setenv("OCCUPANCY_OUT_DIR", dir.path().c_str(), 1);
    auto const r = run({"verify", "lemma5", "--config", "default", "--set", "points=5"});
    auto const r2 = run({"moments", "--t", "50", "--out", "m.csv"});
    ::unsetenv("OCCUPANCY_OUT_DIR");
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(dir.path() / "lemma5.csv"));
    EXPECT_TRUE(fs::exists(dir.path() / "lemma5.json"));
    EXPECT_EQ(r2.code, 0) << r2.err;
    EXPECT_TRUE(fs::exists(dir.path() / "m.csv"));
}
