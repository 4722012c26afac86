#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "dio/engine.hpp"
#include "dio/error.hpp"
#include "dio/hashing.hpp"
#include "dio/harness.hpp"
#include "prime_fixture.hpp"

namespace dio {
namespace {

namespace fs = std::filesystem;

Candidate cand(std::string id, double total, std::string source, int iter = 0) {
  Candidate c;
  c.id = std::move(id);
  c.source = std::move(source);
  c.source_hash = sha256_hex(c.source);
  c.score.total = total;
  c.created_iter = iter;
  return c;
}

std::string fenced(const std::string& src) { return "```python\n" + src + "```\n"; }

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---- budget and config -------------------------------------------------------

TEST(Budget, EvenSplitWithRemainderOnEarlyStages) {
  EXPECT_EQ(split_budget(20, 4), (std::vector<int>{5, 5, 5, 5}));
  EXPECT_EQ(split_budget(10, 4), (std::vector<int>{3, 3, 2, 2}));
  EXPECT_EQ(split_budget(7, 1), (std::vector<int>{7}));
  for (int total = 1; total <= 40; ++total) {
    for (int s = 1; s <= 8; ++s) {
      const auto b = split_budget(total, s);
      int sum = 0;
      for (std::size_t i = 0; i < b.size(); ++i) {
        sum += b[i];
        if (i > 0) {
          EXPECT_LE(b[i], b[i - 1]);
          EXPECT_LE(b[0] - b[i], 1);
        }
      }
      EXPECT_EQ(sum, total);
    }
  }
}

TEST(Budget, InitialProgramReturnsNone) { EXPECT_EQ(initial_program("g"), "def g(x):\n    return None\n"); }

TEST(EngineConfigJson, RoundTrips) {
  EngineConfig c;
  c.islands = 5;
  c.total_iterations = 33;
  c.stages = 3;
  c.mix = {0.1, 0.3, 0.6};
  c.lambda_c = 0.25;
  c.seed = 12345678901ULL;
  c.model = "m";
  c.use_tpp = false;
  c.parallel_islands = true;
  c.auto_patience = 7;
  EXPECT_EQ(engine_config_from_json(to_json(c)), c);
  EXPECT_EQ(engine_config_from_json(to_json(EngineConfig{})), EngineConfig{});
}

TEST(EngineConfigJson, DefaultsAreTheDocumentedOnes) {
  const EngineConfig c;
  EXPECT_EQ(c.lambda_c, 0.1);
  EXPECT_EQ(c.lambda_h, 0.1);
  EXPECT_EQ(c.islands, 3);
  EXPECT_EQ(c.total_iterations, 20);
  EXPECT_EQ(c.stages, 4);
  EXPECT_EQ(c.migration_period, 5);
  EXPECT_EQ(c.mix, (SamplingMix{0.2, 0.4, 0.4}));
  EXPECT_EQ(c.population_cap, 16u);
}

TEST(EngineConfigJson, UnknownKeyAndBadValuesAreRejected) {
  EXPECT_THROW(engine_config_from_json({{"islandz", 2}}), ConfigError);
  auto bad = [](auto&& mutate) {
    EngineConfig c;
    mutate(c);
    EXPECT_THROW(c.validate(), ConfigError);
  };
  bad([](EngineConfig& c) { c.islands = 0; });
  bad([](EngineConfig& c) { c.stages = 0; });
  bad([](EngineConfig& c) { c.total_iterations = 3; });
  bad([](EngineConfig& c) { c.mix = {0.5, 0.5, 0.5}; });
  bad([](EngineConfig& c) { c.mix = {-0.2, 0.6, 0.6}; });
  bad([](EngineConfig& c) { c.lambda_h = -1; });
  bad([](EngineConfig& c) { c.timeout_ms = 0; });
  bad([](EngineConfig& c) { c.softmax_temperature = 0; });
  EXPECT_NO_THROW(EngineConfig{}.validate());
}

// ---- population operators ------------------------------------------------------

TEST(Ranking, TotalThenLengthThenAgeThenId) {
  EXPECT_TRUE(ranks_above(cand("a", 0.9, "xxxx"), cand("b", 0.8, "x")));
  EXPECT_TRUE(ranks_above(cand("a", 0.8, "x"), cand("b", 0.8, "xx")));
  EXPECT_TRUE(ranks_above(cand("b", 0.8, "x", 1), cand("a", 0.8, "y", 2)));
  EXPECT_TRUE(ranks_above(cand("a", 0.8, "x", 1), cand("b", 0.8, "y", 1)));
  EXPECT_FALSE(ranks_above(cand("a", 0.8, "x", 1), cand("a", 0.8, "x", 1)));
}

TEST(Insert, DuplicateCapAndStrictReplacement) {
  Island isl;
  EXPECT_EQ(insert_child(isl, cand("a", 0.2, "A"), 2), InsertOutcome::Inserted);
  EXPECT_EQ(insert_child(isl, cand("a2", 0.9, "A"), 2), InsertOutcome::DuplicateRejected);
  EXPECT_EQ(insert_child(isl, cand("b", 0.5, "B"), 2), InsertOutcome::Inserted);
  // Full: an equal score does not displace the worst.
  EXPECT_EQ(insert_child(isl, cand("c", 0.2, "C"), 2), InsertOutcome::OutcompetedRejected);
  EXPECT_EQ(insert_child(isl, cand("d", 0.3, "D"), 2), InsertOutcome::Inserted);
  ASSERT_EQ(isl.population.size(), 2u);
  std::set<std::string> ids;
  for (const auto& c : isl.population) ids.insert(c.id);
  EXPECT_EQ(ids, (std::set<std::string>{"b", "d"}));
}

Island three_member_island() {
  Island isl;
  isl.population = {cand("lo", 0.0, "L"), cand("mid", 0.5, "M"), cand("hi", 1.0, "H")};
  return isl;
}

TEST(Sampling, PureBestAlwaysReturnsTheLeader) {
  const auto isl = three_member_island();
  Rng rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_parent(isl, {0, 1, 0}, rng).id, "hi");
}

TEST(Sampling, PureRandomIsRoughlyUniform) {
  const auto isl = three_member_island();
  Rng rng(2);
  std::map<std::string, int> n;
  const int draws = 30000;
  for (int i = 0; i < draws; ++i) ++n[sample_parent(isl, {1, 0, 0}, rng).id];
  for (const auto& [id, k] : n) EXPECT_NEAR(k / double(draws), 1.0 / 3, 0.02) << id;
}

TEST(Sampling, WeightedFollowsSoftmaxOfTotals) {
  const auto isl = three_member_island();
  for (double temp : {1.0, 0.25}) {
    std::vector<double> w;
    double z = 0;
    for (const auto& c : isl.population) z += std::exp(c.score.total / temp);
    for (const auto& c : isl.population) w.push_back(std::exp(c.score.total / temp) / z);
    Rng rng(3);
    std::map<std::string, int> n;
    const int draws = 40000;
    for (int i = 0; i < draws; ++i) ++n[sample_parent(isl, {0, 0, 1}, rng, temp).id];
    for (std::size_t i = 0; i < isl.population.size(); ++i) {
      EXPECT_NEAR(n[isl.population[i].id] / double(draws), w[i], 0.015) << temp;
    }
  }
}

TEST(Context, DistinctMembersWhenPopulationAllows) {
  Island isl;
  for (int i = 0; i < 6; ++i) isl.population.push_back(cand("c" + std::to_string(i), i / 10.0, std::string(1, char('a' + i))));
  const auto& parent = isl.population[5];  // the leader
  Rng rng(4);
  for (int r = 0; r < 50; ++r) {
    const auto pick = build_context(parent, isl, rng);
    ASSERT_EQ(pick.best_two.size(), 2u);
    EXPECT_EQ(pick.best_two[0]->id, "c4");
    EXPECT_EQ(pick.best_two[1]->id, "c3");
    std::set<std::string> ids{parent.id, pick.best_two[0]->id, pick.best_two[1]->id, pick.inspiration->id};
    EXPECT_EQ(ids.size(), 4u);
  }
}

TEST(Context, SingleMemberIsReused) {
  Island isl;
  isl.population = {cand("only", 0.1, "x")};
  Rng rng(5);
  const auto pick = build_context(isl.population[0], isl, rng);
  ASSERT_EQ(pick.best_two.size(), 2u);
  EXPECT_EQ(pick.best_two[0]->id, "only");
  EXPECT_EQ(pick.inspiration->id, "only");
}

TEST(Migration, RingOnPeriodOnly) {
  std::vector<Island> islands(3);
  for (int k = 0; k < 3; ++k) {
    islands[k].index = k;
    islands[k].population = {cand("best" + std::to_string(k), 0.1 * (k + 1), "src" + std::to_string(k))};
  }
  EXPECT_TRUE(migrate(islands, 5, 4, 2).empty());
  std::vector<Candidate> clones;
  const auto ev = migrate(islands, 5, 5, 2, 16, &clones);
  ASSERT_EQ(ev.size(), 3u);
  for (int k = 0; k < 3; ++k) {
    const auto& e = ev[k];
    EXPECT_EQ(e.kind, EventKind::Migration);
    EXPECT_EQ(e.island, (k + 1) % 3);
    EXPECT_EQ(e.parent_id, "best" + std::to_string(k));
    EXPECT_EQ(e.outcome, Outcome::Inserted);
  }
  EXPECT_EQ(clones.size(), 3u);
  for (const auto& isl : islands) EXPECT_EQ(isl.population.size(), 2u);
  // Second wave: island 0's best is now the clone from island 2, which island 1
  // lacks; the other two offers are already present on their destinations.
  const auto again = migrate(islands, 5, 10, 2);
  ASSERT_EQ(again.size(), 3u);
  EXPECT_EQ(again[0].outcome, Outcome::Inserted);
  EXPECT_EQ(again[1].outcome, Outcome::DuplicateRejected);
  EXPECT_EQ(again[2].outcome, Outcome::DuplicateRejected);

  std::vector<Island> lone(1);
  lone[0].population = {cand("x", 0, "x")};
  EXPECT_TRUE(migrate(lone, 5, 5, 1).empty());
}

// ---- search --------------------------------------------------------------------

class PrimeRun : public ::testing::Test {
 protected:
  Task task = build_split(find_task_def("prime_factorization"));
  FakeExecutor fx = testing::prime_executor(task);
};

TEST_F(PrimeRun, WorkedExampleReplay) {
  ScriptedMock llm(testing::prime_script());
  const auto r = run_task(task, testing::prime_config(), llm, fx);
  EXPECT_TRUE(r.error.empty()) << r.error;
  EXPECT_TRUE(r.solved);
  EXPECT_EQ(r.hidden.accuracy, 1.0);
  EXPECT_EQ(r.hidden.total, 15);
  EXPECT_EQ(r.hidden_eval_count, 1);
  EXPECT_EQ(r.visible_accuracy, 1.0);
  EXPECT_EQ(r.final_source, testing::kPrimeL4);
  EXPECT_EQ(r.mutation_calls, 4);

  ASSERT_EQ(r.stages.size(), 4u);
  const double expected_acc[] = {1.0 / 2, 2.0 / 4, 5.0 / 6, 8.0 / 8};
  const char* expected_phase[] = {"Red", "Red", "Red", "Green"};
  ASSERT_EQ(r.events.size(), 4u);
  for (std::size_t s = 0; s < 4; ++s) {
    EXPECT_EQ(r.stages[s].best_score.acc_curr, expected_acc[s]) << s;
    const auto& e = r.events[s];
    EXPECT_EQ(e.stage, int(s) + 1);
    EXPECT_EQ(e.outcome, Outcome::Inserted);
    EXPECT_EQ(e.phase, expected_phase[s]);
    ASSERT_TRUE(e.score.has_value());
    EXPECT_EQ(e.score->acc_curr, expected_acc[s]);
  }
  EXPECT_EQ(classify_trajectory(r.stage_lengths()), TrajectoryClass::MonotoneUp);
}

TEST_F(PrimeRun, EventStreamMatchesGolden) {
  ScriptedMock llm(testing::prime_script());
  const auto r = run_task(task, testing::prime_config(), llm, fx);
  const fs::path golden = fs::path(DIO_GOLDEN_DIR) / "prime_events.jsonl";
  if (std::getenv("DIO_REGEN_GOLDEN")) {
    std::ofstream(golden, std::ios::binary) << events_jsonl(r);
  }
  ASSERT_TRUE(fs::exists(golden));
  EXPECT_EQ(events_jsonl(r), read_file(golden));
}

TEST_F(PrimeRun, PromptsNeverShowHeldOutInputs) {
  struct Recorder final : LlmClient {
    ScriptedMock inner{testing::prime_script()};
    std::vector<std::string> prompts;
    ChatResponse complete(const ChatRequest& req) override {
      for (const auto& m : req.messages) prompts.push_back(m.content);
      return inner.complete(req);
    }
  } llm;
  run_task(task, testing::prime_config(), llm, fx);
  ASSERT_FALSE(llm.prompts.empty());
  for (const auto& ex : task.hidden) {
    const auto call = "f(" + literal_form(ex.input) + ")";
    for (const auto& p : llm.prompts) EXPECT_EQ(p.find(call), std::string::npos) << call;
  }
}

TEST_F(PrimeRun, RunRecordSurvivesTheRunDirectory) {
  ScriptedMock llm(testing::prime_script());
  const auto r = run_task(task, testing::prime_config(), llm, fx);
  const auto dir = fs::temp_directory_path() / "dio_engine_rundir";
  fs::remove_all(dir);
  write_run_dir(r, dir);
  EXPECT_TRUE(fs::exists(dir / "events.jsonl"));
  EXPECT_EQ(read_file(dir / ("candidates/" + r.final_id + ".src")), testing::kPrimeL4);
  EXPECT_EQ(nlohmann::json(to_json(read_run_dir(dir))), nlohmann::json(to_json(r)));
  fs::remove_all(dir);
}

TEST_F(PrimeRun, ScriptViolationPropagates) {
  auto steps = testing::prime_script();
  steps[1].hint = "this text is not in any prompt";
  ScriptedMock llm(steps);
  EXPECT_THROW(run_task(task, testing::prime_config(), llm, fx), MockScriptViolation);
}

TEST_F(PrimeRun, FailedResponsesBecomeEventsAndTheRunContinues) {
  struct Flaky final : LlmClient {
    ChatResponse complete(const ChatRequest& req) override {
      switch (req.ordinal) {
        case 0:
          throw LlmUnavailable("endpoint down");
        case 1:
          return {"no code here", 5, 5};
        case 2:
          return {"<<<<<<< SEARCH\nnot in the parent\n=======\nx\n>>>>>>> REPLACE\n", 5, 5};
        default:
          return {fenced(initial_program("f")), 5, 5};
      }
    }
  } llm;
  auto cfg = testing::prime_config();
  cfg.stages = 1;
  const auto r = run_task(task, cfg, llm, fx);
  EXPECT_TRUE(r.error.empty());
  ASSERT_EQ(r.events.size(), 4u);
  EXPECT_EQ(r.events[0].outcome, Outcome::LlmFailed);
  EXPECT_EQ(r.events[1].outcome, Outcome::ParseFailed);
  EXPECT_EQ(r.events[2].outcome, Outcome::DiffFailed);
  EXPECT_EQ(r.events[3].outcome, Outcome::DuplicateRejected);
  EXPECT_FALSE(r.solved);
  EXPECT_EQ(r.hidden_eval_count, 1);
}

TEST_F(PrimeRun, EarlyExitOnlyInTheFinalStage) {
  std::vector<ScriptStep> steps(8, ScriptStep{"", fenced(testing::kPrimeL4), 1, 1});
  auto cfg = testing::prime_config();
  cfg.total_iterations = 8;
  cfg.stages = 2;
  ScriptedMock llm(steps);
  const auto r = run_task(task, cfg, llm, fx);
  ASSERT_EQ(r.stages.size(), 2u);
  EXPECT_FALSE(r.stages[0].early_exit);
  EXPECT_EQ(r.stages[0].iterations_run, 4);
  EXPECT_TRUE(r.stages[1].early_exit);
  EXPECT_EQ(r.stages[1].iterations_run, 0);  // the seed is already perfect
  EXPECT_TRUE(r.solved);
}

TEST_F(PrimeRun, SerialAndParallelIslandsAgree) {
  auto cfg = testing::prime_config();
  cfg.islands = 3;
  cfg.total_iterations = 12;
  cfg.stages = 3;
  cfg.migration_period = 2;
  cfg.seed = 42;
  auto run = [&](bool parallel) {
    auto c = cfg;
    c.parallel_islands = parallel;
    ScriptedMock llm(testing::mixed_script(36));
    auto r = run_task(task, c, llm, fx);
    r.config = nlohmann::ordered_json();  // differs only in the scheduling flag
    return to_json(r).dump();
  };
  const auto serial = run(false);
  EXPECT_EQ(serial, run(false));
  for (int k = 0; k < 3; ++k) EXPECT_EQ(serial, run(true)) << k;
}

TEST_F(PrimeRun, StageSeedIsPreviousBest) {
  ScriptedMock llm(testing::prime_script());
  const auto r = run_task(task, testing::prime_config(), llm, fx);
  for (std::size_t s = 1; s < r.stages.size(); ++s) {
    EXPECT_EQ(r.sources.at(r.stages[s].seed_id), r.sources.at(r.stages[s - 1].best_id));
  }
}

}  // namespace
}  // namespace dio
