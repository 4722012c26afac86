#include <gtest/gtest.h>

#include "dio/curriculum.hpp"
#include "dio/engine.hpp"
#include "dio/scoring.hpp"
#include "prime_fixture.hpp"

namespace dio {
namespace {

using testing::kPrimeL1;
using testing::kPrimeL2;
using testing::kPrimeL3;
using testing::kPrimeL4;
using testing::kPrimeLookup;

class PrimeScoring : public ::testing::Test {
 protected:
  Task task = build_split(find_task_def("prime_factorization"));
  FakeExecutor fx = testing::prime_executor(task);
  std::vector<Example> pairs = testing::prime_pairs();
};

TEST_F(PrimeScoring, FitnessOfTheWalkThroughPrograms) {
  EXPECT_EQ(fitness(kPrimeL1, "f", pairs, fx), 0.125);      // only f(1) = []
  EXPECT_EQ(fitness(kPrimeL2, "f", pairs, fx), 0.25);       // f(2), f(3)
  EXPECT_EQ(fitness(kPrimeL3, "f", pairs, fx), 0.625);      // fails 8, 12, 30
  EXPECT_EQ(fitness(kPrimeL4, "f", pairs, fx), 1.0);
  EXPECT_EQ(fitness(kPrimeLookup, "f", pairs, fx), 1.0);
  EXPECT_EQ(fitness(initial_program("f"), "f", pairs, fx), 0.0);
}

TEST_F(PrimeScoring, HeldOutUsesTheHiddenSplit) {
  const auto good = heldout_eval(kPrimeL4, task, fx);
  EXPECT_EQ(good.total, 15);
  EXPECT_EQ(good.correct, 15);
  EXPECT_EQ(good.accuracy, 1.0);
  const auto table = heldout_eval(kPrimeLookup, task, fx);
  EXPECT_EQ(table.total, 15);
  EXPECT_LT(table.accuracy, 1.0);
}

TEST_F(PrimeScoring, FailuresAreCappedAndDescribed) {
  const auto r = evaluate(kPrimeL1, "f", pairs, fx, Origin::Replay);
  EXPECT_EQ(r.correct, 1);
  EXPECT_EQ(r.total, 8);
  ASSERT_EQ(r.failures.size(), kMaxFailures);
  EXPECT_EQ(r.failures[0].origin, Origin::Replay);
  EXPECT_EQ(r.failures[0].input, Value::integer(2));
  EXPECT_EQ(r.failures[0].expected, Value::int_list({2}));
  EXPECT_EQ(r.failures[0].got, CaseOutcome::ok(Value::int_list({})));
}

TEST_F(PrimeScoring, ErrorsAndUntabulatedCasesCountAsWrong) {
  const auto r = evaluate("def f(n):\n    return 1 / 0\n", "f", pairs, fx);
  EXPECT_EQ(r.correct, 0);
  EXPECT_EQ(r.accuracy, 0.0);
  EXPECT_EQ(r.failures[0].got.status, CaseOutcome::Status::GuestError);
}

TEST_F(PrimeScoring, StageScoreExcludesReplay) {
  const auto plan = build_plan(task.visible, 4, kDefaultReplayCap, 0);
  const auto ev = stage_score(kPrimeL3, "f", plan.stages[2], fx);
  EXPECT_EQ(ev.current.total, 6);
  EXPECT_EQ(ev.current.correct, 5);
  EXPECT_EQ(ev.score.acc_curr, 5.0 / 6.0);
  EXPECT_EQ(ev.replay.total, 4);
  EXPECT_EQ(ev.replay.accuracy, 1.0);
  EXPECT_EQ(ev.score.total, 5.0 / 6.0 - 0.1 * omega_comp(kPrimeL3) - 0.1 * ev.score.omega_hard);
}

TEST(Scoring, StageScoreIdentityOnRandomTuples) {
  Rng rng(77);
  for (int i = 0; i < 1000; ++i) {
    const double acc = rng.uniform01(), oc = rng.uniform01(), oh = rng.uniform01();
    const double lc = rng.uniform01(), lh = rng.uniform01();
    const auto s = make_stage_score(acc, oc, oh, lc, lh);
    EXPECT_EQ(s.total, acc - lc * oc - lh * oh);
    EXPECT_EQ(s.acc_curr, acc);
    EXPECT_EQ(s.omega_comp, oc);
    EXPECT_EQ(s.omega_hard, oh);
    EXPECT_EQ(s.lambda_c, lc);
    EXPECT_EQ(s.lambda_h, lh);
  }
}

TEST(Scoring, DefaultLambdas) {
  EXPECT_EQ(kDefaultLambda, 0.1);
  EXPECT_EQ(EngineConfig{}.lambda_c, 0.1);
  EXPECT_EQ(EngineConfig{}.lambda_h, 0.1);
  EXPECT_EQ(make_stage_score(1, 1, 1).total, 1.0 - 0.1 - 0.1);
}

TEST(Scoring, ComplexityCountsLexemes) {
  // def f ( n ) : return [ ]
  EXPECT_EQ(omega_comp(kPrimeL1), 9.0 / 512.0);
  EXPECT_EQ(omega_comp(kPrimeL1 + "# a long comment that is ignored\n"), 9.0 / 512.0);
  std::string big = "def f(n):\n";
  for (int i = 0; i < 200; ++i) big += "    n = n + 1\n";
  EXPECT_EQ(omega_comp(big), 1.0);
  EXPECT_EQ(omega_comp(""), 0.0);
}

TEST(Scoring, MemorizationPenaltyOnTheLookupTable) {
  const auto pairs = testing::prime_pairs();
  // Every output literal but "[]" has at least three characters and appears.
  EXPECT_EQ(omega_hard(kPrimeLookup, pairs), 7.0 / 8.0);
  EXPECT_EQ(omega_hard(kPrimeL4, pairs), 0.0);
  EXPECT_EQ(omega_hard(kPrimeL1, pairs), 0.0);
  EXPECT_EQ(omega_hard(kPrimeL4, {}), 0.0);
}

TEST(Scoring, MemorizationIgnoresCommentsAndWhitespace) {
  const std::vector<Example> ex{{Value::integer(12345), Value::int_list({3, 5, 823})}};
  EXPECT_EQ(omega_hard("def f(n):\n    # 12345 -> [3, 5, 823]\n    return n\n", ex), 0.0);
  EXPECT_EQ(omega_hard("def f(n):\n    return [3,5,   823]\n", ex), 1.0);
  EXPECT_EQ(omega_hard("def f(n):\n    return n == 12345\n", ex), 1.0);
  EXPECT_EQ(omega_hard("def f(n):\n    s = '# not a comment [3, 5, 823]'\n", ex), 1.0);
}

TEST(Scoring, ShortLiteralsNeverCount) {
  const std::vector<Example> ex{{Value::integer(12), Value::integer(3)}};
  EXPECT_EQ(omega_hard("def f(n):\n    return 12 + 3\n", ex), 0.0);
}

TEST(Scoring, JsonRoundTrips) {
  const auto s = make_stage_score(0.75, 0.125, 0.5);
  const auto back = stage_score_from_json(nlohmann::json::parse(to_json(s).dump()));
  EXPECT_EQ(back.total, s.total);
  EXPECT_EQ(back.omega_hard, s.omega_hard);
  FailureArtifact f{Origin::Replay, Value::integer(8), Value::int_list({2, 2, 2}), CaseOutcome::timeout(), "n"};
  const auto fb = failure_from_json(nlohmann::json::parse(to_json(f).dump()));
  EXPECT_EQ(fb.origin, Origin::Replay);
  EXPECT_EQ(fb.got, f.got);
  EXPECT_EQ(fb.expected, f.expected);
}

}  // namespace
}  // namespace dio
