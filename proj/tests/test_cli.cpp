#include <gtest/gtest.h>

#include <fstream>
#include <iterator>
#include <sstream>

#include "commands.hpp"
#include "rdmd/io.hpp"
#include "test_util.hpp"

using namespace rdmd;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "rdmd");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

// Small logistic dataset with M = 300 snapshots.
fs::path logistic_dir() {
    static const fs::path dir = [] {
        auto d = rdmd::test::scratch_dir("cli_logistic");
        const auto r = run_cli({"gen", "logistic", "--n-init", "120", "--m-steps", "300", "--burn-in", "50", "--out",
                                d.string()});
        EXPECT_EQ(r.code, 0) << r.err;
        return d;
    }();
    return dir;
}

fs::path sech_dir() {
    static const fs::path dir = [] {
        auto d = rdmd::test::scratch_dir("cli_sech");
        const auto r = run_cli({"gen", "sech", "--n-space", "600", "--m-time", "201", "--out", d.string()});
        EXPECT_EQ(r.code, 0) << r.err;
        return d;
    }();
    return dir;
}

} // namespace

TEST(Cli, GenLogisticRecordsParameterInManifest) {
    const auto dir = logistic_dir();
    EXPECT_TRUE(fs::exists(dir / "X.rdmd"));
    EXPECT_TRUE(fs::exists(dir / "Y.rdmd"));
    const Json m = read_json(dir / "manifest.json");
    EXPECT_EQ(m["command"], "gen");
    EXPECT_EQ(m["config"]["a"], "3.56994");
    EXPECT_EQ(m["config"]["preset"], "logistic");
    EXPECT_EQ(m["tool_version"], cli::kToolVersion);
    const RMat x = load_binary(dir / "X.rdmd");
    EXPECT_EQ(x.rows(), 120);
    EXPECT_EQ(x.cols(), 300);
}

TEST(Cli, GenSechWritesTruth) {
    const auto dir = sech_dir();
    const auto truth = load_truth(dir);
    EXPECT_TRUE(truth.complex_stacked);
    EXPECT_EQ(truth.truth.gammas.size(), 20u);
    EXPECT_EQ(load_binary(dir / "X.rdmd").rows(), 1200);
}

TEST(Cli, ManifestReplayIsByteIdentical) {
    const auto dir = logistic_dir();
    const auto again = rdmd::test::scratch_dir("cli_replay");
    const auto r = run_cli({"gen", "--config", (dir / "manifest.json").string(), "--out", again.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(slurp(dir / "X.rdmd"), slurp(again / "X.rdmd"));
    EXPECT_EQ(slurp(dir / "Y.rdmd"), slurp(again / "Y.rdmd"));
}

TEST(Cli, MissingOutputDirectoryIsPathError) {
    const auto r = run_cli({"gen", "logistic", "--out", "/nonexistent/rdmd/out"});
    EXPECT_EQ(r.code, cli::kPathError);
    EXPECT_EQ(r.err.rfind("error: ", 0), 0u);
}

TEST(Cli, ZeroDimensionIsInvalidParameter) {
    const auto out = rdmd::test::scratch_dir("cli_l0");
    const auto r = run_cli({"dmd", "--input", logistic_dir().string(), "--method", "exact", "--L", "0", "--out",
                            out.string()});
    EXPECT_EQ(r.code, cli::kInvalidParameter);
}

TEST(Cli, EpsilonResolvesDimension) {
    const auto out = rdmd::test::scratch_dir("cli_eps");
    const auto r = run_cli({"dmd", "--input", logistic_dir().string(), "--method", "rdmd", "--epsilon", "0.9", "--C",
                            "6", "--out", out.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const Json m = read_json(out / "manifest.json");
    EXPECT_EQ(m["resolved"]["L"], 43);
    const auto sp = load_spectrum(out);
    EXPECT_EQ(sp.spectrum.l_dim, 43);
    EXPECT_TRUE(fs::exists(out / "frequencies.csv"));
    EXPECT_TRUE(fs::exists(out / "spectrum.svg"));
}

TEST(Cli, DmdOnSechUsesTruthTimeStep) {
    const auto out = rdmd::test::scratch_dir("cli_dmd_sech");
    const auto r = run_cli({"dmd", "--input", sech_dir().string(), "--method", "rdmd", "--L", "20", "--seed", "3",
                            "--out", out.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto sp = load_spectrum(out);
    EXPECT_EQ(sp.dt, load_truth(sech_dir()).truth.dt);
    EXPECT_EQ(sp.spectrum.rank_used, 20);
    EXPECT_EQ(sp.spectrum.modes.rows(), 600);
}

TEST(Cli, CompareAgainstTruth) {
    const auto out = rdmd::test::scratch_dir("cli_compare");
    const auto r = run_cli({"compare", "--input", sech_dir().string(), "--L", "20", "--out", out.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const Json c = read_json(out / "comparison.json");
    ASSERT_TRUE(c.contains("truth_a"));
    for (const auto& e : c["truth_a"]) EXPECT_LT(e["omega_err"].get<double>(), 1e-7);
    EXPECT_TRUE(fs::exists(out / "comparison.csv"));
    EXPECT_TRUE(fs::exists(out / "truth_errors.csv"));
}

TEST(Cli, ErrorboundSweep) {
    const auto out = rdmd::test::scratch_dir("cli_eb");
    const auto r = run_cli({"errorbound", "--input", logistic_dir().string(), "--L", "20", "100", "--C", "2",
                            "--n-seeds", "2", "--out", out.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const Json j = read_json(out / "errorbound.json");
    EXPECT_EQ(j["rows"].size(), 4u);
    EXPECT_TRUE(fs::exists(out / "errorbound.csv"));
    EXPECT_TRUE(fs::exists(out / "per_snapshot.csv"));
}

TEST(Cli, BenchRejectsZeroRepetitions) {
    const auto out = rdmd::test::scratch_dir("cli_bench0");
    const auto r = run_cli({"bench", "--sizes", "200x40", "--repetitions", "0", "--out", out.string()});
    EXPECT_EQ(r.code, cli::kInvalidParameter);
}

TEST(Cli, BenchSmallRun) {
    const auto out = rdmd::test::scratch_dir("cli_bench");
    const auto r = run_cli({"bench", "--sizes", "300x60", "--L", "10", "--repetitions", "1", "--out", out.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(out / "bench.csv"));
    EXPECT_EQ(read_json(out / "bench.json")["tables"].size(), 1u);
}

TEST(Cli, ParseErrorsAndHelp) {
    EXPECT_EQ(run_cli({"gen", "nosuchpreset", "--out", "/tmp"}).code, cli::kInvalidParameter);
    EXPECT_EQ(run_cli({"dmd", "--bogus"}).code, cli::kInvalidParameter);
    EXPECT_EQ(run_cli({"--help"}).code, cli::kOk);
    EXPECT_EQ(run_cli({"--version"}).code, cli::kOk);
}

TEST(Cli, MalformedInputIsFormatError) {
    const auto in = rdmd::test::scratch_dir("cli_badinput");
    std::ofstream(in / "X.rdmd") << "garbage";
    std::ofstream(in / "Y.rdmd") << "garbage";
    const auto out = rdmd::test::scratch_dir("cli_badinput_out");
    EXPECT_EQ(run_cli({"dmd", "--input", in.string(), "--L", "2", "--out", out.string()}).code, cli::kFormatError);
}
