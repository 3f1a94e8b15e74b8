#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code;
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(HERMES_CLI_PATH) + " " + args + " 2>/dev/null";
    int status = std::system(cmd.c_str());
    return {WEXITSTATUS(status)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path tmpdir() {
    fs::path d = fs::temp_directory_path() / "hermes-cli-test";
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST(Cli, RunWithBundledWorkloadWritesAReport) {
    fs::path out = tmpdir() / "report.json";
    fs::remove(out);
    auto r = run_cli("run --config paper-default --workload attention-small --out " +
                     out.string() + " --format json");
    EXPECT_EQ(r.exit_code, 0);
    ASSERT_TRUE(fs::exists(out));
    auto j = nlohmann::json::parse(slurp(out));
    EXPECT_GT(j.at("total_requests").get<std::uint64_t>(), 0u);
    EXPECT_EQ(j.at("workload").get<std::string>(), "attention-small");
}

TEST(Cli, MissingTraceFileIsIoError) {
    auto r = run_cli("run --trace /nonexistent/trace.txt --out /tmp/x.json");
    EXPECT_EQ(r.exit_code, 2);
}

TEST(Cli, InvalidConfigIsValidationError) {
    fs::path cfg = tmpdir() / "bad.conf";
    std::ofstream(cfg) << "l1.size_bytes = 48k\nl1.associativity = 8\nl1.line_bytes = 64\n";
    auto r = run_cli("run --config " + cfg.string() + " --workload attention-small");
    EXPECT_EQ(r.exit_code, 1);
}

TEST(Cli, UnknownWorkloadIsValidationError) {
    auto r = run_cli("run --workload no-such-workload");
    EXPECT_EQ(r.exit_code, 1);
}

TEST(Cli, GenTraceUnitGemmIsFourLinesPlusComments) {
    fs::path out = tmpdir() / "unit.trace";
    auto r = run_cli("gen-trace --kind gemm --spec m=1 n=1 k=1 tile_m=1 tile_n=1 tile_k=1"
                     " --cores 1 --out " + out.string());
    EXPECT_EQ(r.exit_code, 0);
    std::istringstream in(slurp(out));
    std::string line;
    int comments = 0, requests = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') ++comments;
        else ++requests;
    }
    EXPECT_GT(comments, 0);
    EXPECT_EQ(requests, 4);
}

TEST(Cli, UnknownKindFails) {
    auto r = run_cli("gen-trace --kind fft --out /tmp/x.trace");
    EXPECT_EQ(r.exit_code, 1);
}

TEST(Cli, BadSpecKeyFails) {
    auto r = run_cli("gen-trace --kind gemm --spec bogus=1 --out /tmp/x.trace");
    EXPECT_EQ(r.exit_code, 1);
}

TEST(Cli, SameInvocationTwiceIsByteIdentical) {
    fs::path a = tmpdir() / "a.trace";
    fs::path b = tmpdir() / "b.trace";
    ASSERT_EQ(run_cli("gen-trace --kind rnn --spec hidden=64 timesteps=4 --cores 2 --out " +
                      a.string()).exit_code, 0);
    ASSERT_EQ(run_cli("gen-trace --kind rnn --spec hidden=64 timesteps=4 --cores 2 --out " +
                      b.string()).exit_code, 0);
    EXPECT_EQ(slurp(a), slurp(b));
}

TEST(Cli, RunOnGeneratedTraceFile) {
    fs::path trace = tmpdir() / "run.trace";
    ASSERT_EQ(run_cli("gen-trace --kind attention --spec seq_len=16 head_dim=8 --cores 2 --out " +
                      trace.string()).exit_code, 0);
    fs::path out = tmpdir() / "from-trace.json";
    auto r = run_cli("run --config shared-l3 --trace " + trace.string() + " --out " + out.string());
    EXPECT_EQ(r.exit_code, 0);
    auto j = nlohmann::json::parse(slurp(out));
    EXPECT_GT(j.at("total_requests").get<std::uint64_t>(), 0u);
}

TEST(Cli, TextAndCsvFormatsWork) {
    fs::path out = tmpdir() / "report.csv";
    auto r = run_cli("run --workload attention-small --format csv --out " + out.string());
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_NE(slurp(out).find("config,workload,"), std::string::npos);
}

TEST(Cli, SeedEnvOverrideStillDeterministic) {
    fs::path a = tmpdir() / "seed-a.json";
    fs::path b = tmpdir() / "seed-b.json";
    const std::string base = "run --workload attention-small --out ";
    ASSERT_EQ(std::system(("HERMES_SEED=99 " + std::string(HERMES_CLI_PATH) + " " + base +
                           a.string() + " 2>/dev/null")
                              .c_str()),
              0);
    ASSERT_EQ(std::system(("HERMES_SEED=99 " + std::string(HERMES_CLI_PATH) + " " + base +
                           b.string() + " 2>/dev/null")
                              .c_str()),
              0);
    EXPECT_EQ(slurp(a), slurp(b));
    EXPECT_FALSE(slurp(a).empty());
}

TEST(Cli, ShippedConfigFileMatchesBuiltInDefaults) {
    const fs::path shipped = fs::path(HERMES_SOURCE_DIR) / "configs" / "paper-default.conf";
    ASSERT_TRUE(fs::exists(shipped));
    fs::path a = tmpdir() / "shipped.json";
    fs::path b = tmpdir() / "builtin.json";
    ASSERT_EQ(run_cli("run --config " + shipped.string() + " --workload attention-small --out " +
                      a.string()).exit_code, 0);
    ASSERT_EQ(run_cli("run --config paper-default --workload attention-small --out " +
                      b.string()).exit_code, 0);
    EXPECT_EQ(slurp(a), slurp(b));
}
