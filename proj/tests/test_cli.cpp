#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pmatch/market_io.hpp"
#include "pmatch_cli.hpp"

using namespace pmatch;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("pmatch_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }
    void write(const std::string& name, const std::string& text) const { std::ofstream(dir_ / name) << text; }

    fs::path dir_;
};

// Strips the effective-config header and turns the rest into a config file.
std::string effective_to_config(const std::string& err) {
    std::istringstream in(err);
    std::string line, out;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#') out += line + "\n";
    return out;
}

const char* kTiny = "2 2 symmetric 1 0 0\n0: 0 1\n1: 0\n0: 1 0\n1: 0\n";

}  // namespace

TEST_F(CliTest, SimulatePrintsOneRow) {
    const auto r = run({"simulate", "--n", "200", "--d", "30", "--seed", "7"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.rfind("n,alpha,d,side,total_proposals,matched,perfect\n200,0,30,cpda,", 0), 0u);
    EXPECT_EQ(r.err.rfind("# pmatch simulate effective config\n", 0), 0u);
    EXPECT_NE(r.err.find("seed = 7\n"), std::string::npos);
    // Same seed gives the same bytes, explicit or lazy.
    EXPECT_EQ(run({"simulate", "--n", "200", "--d", "30", "--seed", "7"}).out, r.out);
}

TEST_F(CliTest, LastFlagWins) {
    const auto a = run({"simulate", "--n", "50", "--seed", "1", "--seed", "9"});
    const auto b = run({"simulate", "--n", "50", "--seed", "9"});
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
}

TEST_F(CliTest, EffectiveConfigReproducesOutput) {
    const auto first = run({"sweep", "--n", "80", "--grid", "5,15,40", "--trials", "30", "--seed", "3", "--alpha", "0.1"});
    ASSERT_EQ(first.code, 0) << first.err;
    write("eff.cfg", effective_to_config(first.err));
    const auto again = run({"sweep", "--config", path("eff.cfg")});
    ASSERT_EQ(again.code, 0) << again.err;
    EXPECT_EQ(again.out, first.out);
}

TEST_F(CliTest, ConfigFileAndOverride) {
    write("c.cfg", "# run\nn = 60\nd = 12   # list length\nseed = 5\n");
    const auto from_file = run({"simulate", "--config", path("c.cfg")});
    const auto explicit_flags = run({"simulate", "--n", "60", "--d", "12", "--seed", "5"});
    ASSERT_EQ(from_file.code, 0) << from_file.err;
    EXPECT_EQ(from_file.out, explicit_flags.out);
    const auto overridden = run({"simulate", "--config", path("c.cfg"), "--seed", "6"});
    EXPECT_EQ(overridden.out, run({"simulate", "--n", "60", "--d", "12", "--seed", "6"}).out);

    write("bad.cfg", "n = 60\nbogus = 1\n");
    const auto bad = run({"simulate", "--config", path("bad.cfg")});
    EXPECT_EQ(bad.code, 2);
    EXPECT_NE(bad.err.find("bogus"), std::string::npos);
    EXPECT_EQ(run({"simulate", "--config", path("nope.cfg")}).code, 3);
}

TEST_F(CliTest, ParameterErrorsExitTwo) {
    EXPECT_EQ(run({"simulate", "--n", "0"}).code, 2);
    EXPECT_EQ(run({"simulate", "--alpha", "-1"}).code, 2);
    EXPECT_EQ(run({"simulate", "--model", "weird"}).code, 2);
    EXPECT_EQ(run({"simulate", "--n", "abc"}).code, 2);
    EXPECT_EQ(run({"simulate", "--unknown-flag", "1"}).code, 2);
    EXPECT_EQ(run({"game", "--pg", "0.6", "--pb", "0.6"}).code, 2);
    EXPECT_EQ(run({"bins", "--stop", "sometimes"}).code, 2);
    EXPECT_EQ(run({"bins", "--stop", "occupied", "--n", "5", "--k", "6"}).code, 2);
    EXPECT_EQ(run({"sweep", "--n", "50", "--grid", "1,x"}).code, 2);
    EXPECT_EQ(run({}).code, 2);
}

TEST_F(CliTest, OutputFileAndIoErrors) {
    const auto r = run({"rank", "--n", "100", "--d", "5", "--trials", "3", "--out", path("rank.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.out.empty());
    EXPECT_EQ(slurp(path("rank.csv")).rfind("n,alpha,d,trials,mean_rank,bound,unmatched_frac\n100,0,5,3,", 0), 0u);
    EXPECT_EQ(run({"rank", "--n", "100", "--out", path("no/such/dir.csv")}).code, 3);
    EXPECT_EQ(run({"verify", "--instance", path("absent.txt")}).code, 3);
}

TEST_F(CliTest, VerifyReportsStableAndBlocking) {
    write("tiny.txt", kTiny);
    auto r = run({"verify", "--instance", path("tiny.txt")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "STABLE\n");

    write("m.txt", "0 0\n");
    r = run({"verify", "--instance", path("tiny.txt"), "--matching", path("m.txt")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "blocking 1 0 mutual_preference\n");

    write("m2.txt", "1 1\n");
    r = run({"verify", "--instance", path("tiny.txt"), "--matching", path("m2.txt")});
    EXPECT_NE(r.out.find("blocking 1 1 candidate_prefers_unmatched\n"), std::string::npos);
    EXPECT_NE(r.out.find("blocking 1 1 job_prefers_unmatched\n"), std::string::npos);

    write("broken.txt", "2 2 symmetric 1 0 0\n0: 0 7\n");
    EXPECT_EQ(run({"verify", "--instance", path("broken.txt")}).code, 3);
}

TEST_F(CliTest, DumpThenVerifyRoundTrip) {
    auto r = run({"simulate", "--n", "40", "--d", "6", "--model", "symmetric", "--dump", path("inst.txt"),
                  "--matching-out", path("m.txt")});
    ASSERT_EQ(r.code, 0) << r.err;
    r = run({"verify", "--instance", path("inst.txt"), "--matching", path("m.txt")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "STABLE\n");
}

TEST_F(CliTest, TraceAndChainsFiles) {
    write("tiny.txt", kTiny);
    const auto r = run({"verify", "--instance", path("tiny.txt"), "--trace", path("t.txt")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(slurp(path("t.txt")), "1 0 0 accepted_free\n2 1 0 accepted_displacing 0\n3 0 1 accepted_free\n");
    const std::string chains = slurp(path("t.txt.chains.jsonl"));
    EXPECT_FALSE(chains.empty());
    EXPECT_EQ(chains.back(), '\n');

    const auto sim = run({"simulate", "--n", "30", "--d", "5", "--side", "jpda", "--model", "job-lists", "--trace",
                          path("s.txt"), "--chains", path("s.jsonl")});
    ASSERT_EQ(sim.code, 0) << sim.err;
    EXPECT_TRUE(fs::exists(path("s.jsonl")));
    std::istringstream lines(slurp(path("s.txt")));
    std::string line;
    std::size_t count = 0;
    while (std::getline(lines, line)) ++count;
    const auto row = sim.out.substr(sim.out.find('\n') + 1);
    EXPECT_EQ(row.rfind("30,0,5,jpda," + std::to_string(count) + ",", 0), 0u);
}

TEST_F(CliTest, GameAndBinsRows) {
    auto r = run({"game", "--pg", "0.2", "--pb", "0.5", "--pn", "0.3", "--streak", "1", "--trials", "2000"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("0.2,0.5,0.3,1,tight,2000,0.285714286,0.285714286,0.4,"), std::string::npos);
    r = run({"game", "--pg", "0.2", "--pb", "0.5", "--pn", "0.2", "--trials", "50"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find(",NA,NA,0.8,"), std::string::npos);

    r = run({"bins", "--n", "10", "--stop", "all", "--trials", "4", "--workers", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream lines(r.out);
    std::string line;
    std::getline(lines, line);
    EXPECT_EQ(line, "trial,n,throws,occupied,empty,qF");
    int rows = 0;
    while (std::getline(lines, line)) {
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
        ASSERT_EQ(f.size(), 6u);
        EXPECT_EQ(f[1], "10");
        EXPECT_EQ(f[3], "10");
        EXPECT_EQ(f[4], "0");
        EXPECT_GE(std::stoi(f[2]), 10);
        ++rows;
    }
    EXPECT_EQ(rows, 4);
    EXPECT_EQ(run({"bins", "--n", "10", "--stop", "all", "--trials", "4", "--workers", "1"}).out, r.out);
}

TEST_F(CliTest, HelpExitsZero) {
    const auto r = run({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("simulate"), std::string::npos);
}
