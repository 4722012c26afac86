#ifdef DIO_HAVE_CLI

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "prime_fixture.hpp"

namespace dio::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "dio");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = main(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  fs::path tmp;
  const std::string config = std::string(DIO_FIXTURES_DIR) + "/prime_config.json";
  const std::string mock = std::string(DIO_FIXTURES_DIR) + "/prime.json";
  const std::string fake = std::string(DIO_FIXTURES_DIR) + "/prime_exec.json";

  void SetUp() override {
    tmp = fs::temp_directory_path() /
          ("dio_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(tmp);
    fs::create_directories(tmp);
  }
  void TearDown() override { fs::remove_all(tmp); }

  // Hint-free script: every call answers with the general factorizer.
  std::string plain_mock(int n) {
    auto steps = nlohmann::json::array();
    for (int i = 0; i < n; ++i) {
      steps.push_back({{"hint", ""}, {"response", "```python\n" + testing::kPrimeL4 + "```\n"},
                       {"prompt_tokens", 10}, {"completion_tokens", 5}});
    }
    const auto p = tmp / "plain_mock.json";
    std::ofstream(p) << steps.dump();
    return p.string();
  }

  nlohmann::json report(const fs::path& dir) { return nlohmann::json::parse(read_file(dir / "report.json")); }
};

TEST_F(Cli, GenTwicePrintsTheSameHash) {
  const auto a = invoke({"gen", "--out", (tmp / "a").string()});
  const auto b = invoke({"gen", "--out", (tmp / "b").string()});
  EXPECT_EQ(a.code, kExitOk) << a.err;
  EXPECT_EQ(b.code, kExitOk);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out, read_file(fs::path(DIO_GOLDEN_DIR) / "manifest.sha256"));
  EXPECT_TRUE(fs::exists(tmp / "a" / "manifest.json"));
}

TEST_F(Cli, GenIntoUnwritableLocationFails) {
  std::ofstream(tmp / "plain_file") << "x";
  const auto r = invoke({"gen", "--out", (tmp / "plain_file" / "tasks").string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("[task_catalog]"), std::string::npos) << r.err;
}

TEST_F(Cli, RunWithMockSolvesThePrimeTask) {
  const auto r = invoke({"run", "--config", config, "--out", tmp.string()});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("solved 1/1"), std::string::npos) << r.out;
  const auto j = report(tmp);
  EXPECT_EQ(j["tasks"][0]["hidden_eval_count"], 1);
  EXPECT_EQ(j["tasks"][0]["trajectory"], "MonotoneUp");
  EXPECT_EQ(read_file(tmp / "runs/prime_factorization/events.jsonl"),
            read_file(fs::path(DIO_GOLDEN_DIR) / "prime_events.jsonl"));
  EXPECT_TRUE(fs::exists(tmp / "config.json"));
}

TEST_F(Cli, FlagsOverrideTheConfigFile) {
  const auto r = invoke({"run", "--config", config, "--mode", "ablate-ce", "--mock", plain_mock(4), "--out", tmp.string()});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  const auto j = report(tmp);
  EXPECT_EQ(j["mode"], "ablate-ce");
  EXPECT_EQ(j["ablation"]["stages"], 1);
  EXPECT_EQ(j["tasks"][0]["stages"], 1);

  Overrides o;
  o.config = config;
  o.seed = 5;
  o.islands = 2;
  o.iters = 9;
  o.stages = 3;
  o.tasks = "a,b";
  const auto c = resolve_config(o);
  EXPECT_EQ(c.engine.seed, 5u);
  EXPECT_EQ(c.engine.islands, 2);
  EXPECT_EQ(c.engine.total_iterations, 9);
  EXPECT_EQ(c.engine.stages, 3);
  EXPECT_EQ(c.task_ids, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(fs::path(c.mock), fs::path(mock));
}

TEST_F(Cli, BaselineModesRun) {
  const auto r = invoke({"run", "--config", config, "--mode", "bon", "--samples", "3", "--mock", plain_mock(3), "--out", tmp.string()});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(report(tmp)["tasks"][0]["mutation_calls"], 3);
}

TEST_F(Cli, AutonomousRuns) {
  const nlohmann::json cfg = {{"task_ids", {"prime_factorization"}}, {"fake_exec", fake}, {"islands", 1},
                              {"total_iterations", 4}, {"stages", 4}, {"auto_max_iterations", 4}};
  std::ofstream(tmp / "auto.json") << cfg.dump();
  const auto r = invoke({"autonomous", "--config", (tmp / "auto.json").string(), "--mock", plain_mock(200), "--out",
                         (tmp / "out").string()});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  const auto j = report(tmp / "out");
  EXPECT_EQ(j["mode"], "autonomous");
  EXPECT_EQ(j["tasks"][0]["example_counts"][0], 2);
  EXPECT_EQ(j["tasks"][0]["hidden_eval_count"], 1);
}

TEST_F(Cli, MissingEndpointWithoutMockIsAnInfrastructureFailure) {
  unsetenv("LLM_API_URL");
  const auto r = invoke({"run", "--tasks", "prime_factorization", "--fake-exec", fake});
  EXPECT_EQ(r.code, kExitInfra);
  EXPECT_NE(r.err.find("[llm_gateway]"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("LLM_API_URL"), std::string::npos);
}

TEST_F(Cli, MissingRunnerBinaryIsAnInfrastructureFailure) {
  const auto r = invoke({"run", "--config", config, "--fake-exec", "", "--runner", "/nonexistent/runner"});
  EXPECT_EQ(r.code, kExitInfra);
  EXPECT_NE(r.err.find("executor_gateway"), std::string::npos) << r.err;
}

TEST_F(Cli, StubRunnerReplaysTheWorkedExample) {
  const std::string runner = std::string(DIO_PYTHON) + " " + DIO_STUB_RUNNER;
  const auto r = invoke({"run", "--config", config, "--fake-exec", "", "--runner", runner, "--out", tmp.string()});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("solved 1/1"), std::string::npos) << r.out;
}

TEST_F(Cli, BadInputsExitWithUsageErrors) {
  EXPECT_EQ(invoke({}).code, kExitUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, kExitUsage);
  auto r = invoke({"run", "--config", config, "--mode", "fastest"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("[cli]"), std::string::npos) << r.err;
  r = invoke({"run", "--config", (tmp / "missing.json").string()});
  EXPECT_EQ(r.code, kExitUsage);
  r = invoke({"run", "--config", config, "--tasks", "no_such_task"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("no task matches"), std::string::npos);
  r = invoke({"run", "--config", config, "--mock", (tmp / "missing_mock.json").string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("[llm_gateway]"), std::string::npos) << r.err;
  std::ofstream(tmp / "unknown.json") << R"({"islandz": 3})";
  r = invoke({"run", "--config", (tmp / "unknown.json").string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("islandz"), std::string::npos) << r.err;
}

TEST_F(Cli, ScriptViolationIsReportedPerTask) {
  std::ofstream(tmp / "short.json") << R"([{"hint":"absent from the prompt","response":"x"}])";
  const auto r = invoke({"run", "--config", config, "--mock", (tmp / "short.json").string()});
  EXPECT_EQ(r.code, kExitInfra);
  EXPECT_NE(r.err.find("prime_factorization"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("llm_gateway"), std::string::npos);
}

TEST_F(Cli, ReportMergesRunsAndSumsCounts) {
  const auto a = tmp / "a", b = tmp / "b", merged = tmp / "merged";
  ASSERT_EQ(invoke({"run", "--config", config, "--out", a.string()}).code, kExitOk);
  ASSERT_EQ(invoke({"run", "--config", config, "--mode", "bon", "--samples", "2", "--mock", plain_mock(2), "--out", b.string()}).code, kExitOk);
  const auto ja = report(a), jb = report(b);

  const auto r = invoke({"report", a.string(), b.string(), "--out", merged.string()});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  const auto jm = report(merged);
  EXPECT_EQ(jm["mode"], "merged");
  EXPECT_EQ(jm["overall"]["tasks"], ja["overall"]["tasks"].get<int>() + jb["overall"]["tasks"].get<int>());
  EXPECT_EQ(jm["overall"]["solved"], ja["overall"]["solved"].get<int>() + jb["overall"]["solved"].get<int>());
  EXPECT_EQ(jm["tasks"].size(), 2u);
  for (const char* f : {"ablation.csv", "trajectory.csv", "overfit.csv"}) EXPECT_TRUE(fs::exists(merged / f)) << f;

  // A single run directory works as well, and without --out the JSON goes to stdout.
  const auto single = invoke({"report", (a / "runs" / "prime_factorization").string()});
  EXPECT_EQ(single.code, kExitOk) << single.err;
  EXPECT_EQ(nlohmann::json::parse(single.out)["overall"]["tasks"], 1);
}

TEST_F(Cli, ReportRejectsEmptyAndMalformedInput) {
  auto r = invoke({"report"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("[experiment_harness]"), std::string::npos);
  fs::create_directories(tmp / "junk");
  std::ofstream(tmp / "junk" / "report.json") << "{";
  r = invoke({"report", (tmp / "junk").string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_FALSE(r.err.empty());
}

}  // namespace
}  // namespace dio::cli

#endif
