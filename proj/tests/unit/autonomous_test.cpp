#include <gtest/gtest.h>

#include <deque>

#include "dio/engine.hpp"
#include "prime_fixture.hpp"

namespace dio {
namespace {

const OracleSpec& prime_oracle() { return find_oracle("prime_factorization"); }

TEST(Proposals, AcceptsInDomainLiteralsFromTheFencedBlock) {
  std::vector<std::string> rejected;
  const auto got = accept_proposals("Try these:\n```python\n5\n  7,\n\n```\n9\n", prime_oracle(), {}, 10, &rejected);
  EXPECT_EQ(got, (std::vector<Value>{Value::integer(5), Value::integer(7)}));
  EXPECT_TRUE(rejected.empty());
}

TEST(Proposals, UnfencedResponseIsReadLineByLine) {
  const auto got = accept_proposals("11\n13\n", prime_oracle(), {}, 10);
  EXPECT_EQ(got, (std::vector<Value>{Value::integer(11), Value::integer(13)}));
}

TEST(Proposals, RejectsBadInputsWithReasons) {
  std::vector<std::string> rejected;
  const auto got = accept_proposals("```\n0\n500\n'abc'\nnot a literal\n4\n4\n6\n```", prime_oracle(),
                                    {Value::integer(6)}, 10, &rejected);
  EXPECT_EQ(got, (std::vector<Value>{Value::integer(4)}));
  ASSERT_EQ(rejected.size(), 6u);
  EXPECT_NE(rejected[0].find("outside the domain"), std::string::npos);
  EXPECT_NE(rejected[1].find("outside the domain"), std::string::npos);
  EXPECT_NE(rejected[2].find("outside the domain"), std::string::npos);
  EXPECT_NE(rejected[3].find("not a literal"), std::string::npos);
  EXPECT_NE(rejected[4].find("duplicate"), std::string::npos);
  EXPECT_NE(rejected[5].find("duplicate"), std::string::npos);
}

TEST(Proposals, StopsAtTheRequestedCount) {
  const auto got = accept_proposals("2\n3\n5\n7\n", prime_oracle(), {}, 2);
  EXPECT_EQ(got.size(), 2u);
}

TEST(Proposals, DomainTextNamesTheShape) {
  EXPECT_EQ(describe_domain(prime_oracle().domain), "one integer in [1, 200]");
}

// Answers proposal prompts from a fixed queue of inputs and every mutation
// prompt with the general factorizer.
struct AutoClient final : LlmClient {
  std::deque<std::string> proposals;
  int mutation_calls = 0;
  ChatResponse complete(const ChatRequest& req) override {
    const auto& prompt = req.messages.back().content;
    if (prompt.find("choosing test inputs") != std::string::npos) {
      std::string body;
      if (!proposals.empty()) {
        body = proposals.front();
        proposals.pop_front();
      }
      return {"```\n" + body + "```\n", 10, 5};
    }
    ++mutation_calls;
    return {"```python\n" + testing::kPrimeL4 + "```\n", 20, 15};
  }
};

class AutonomousRun : public ::testing::Test {
 protected:
  Task task = build_split(find_task_def("prime_factorization"));
  FakeExecutor fx = whole_domain(task);

  static FakeExecutor whole_domain(const Task& task) {
    auto fx = testing::prime_executor(task);
    std::vector<Value> all;
    for (int n = 1; n <= 200; ++n) all.push_back(Value::integer(n));
    fx.tabulate(testing::kPrimeL4, all, testing::mirror_l4);
    fx.tabulate(initial_program("f"), all, testing::mirror_initial);
    return fx;
  }
};

TEST_F(AutonomousRun, GrowsTheSetUntilPatienceRunsOut) {
  AutoClient llm;
  llm.proposals = {"1\n2\n", "3\n4\n", "6\n8\n", "12\n30\n", "5\n7\n"};
  auto cfg = testing::prime_config();
  cfg.auto_max_iterations = 20;
  const auto r = run_autonomous(task, cfg, llm, fx);
  EXPECT_TRUE(r.error.empty()) << r.error;
  EXPECT_EQ(r.mode, "autonomous");
  EXPECT_EQ(r.example_counts, (std::vector<std::size_t>{2, 4, 6, 8, 10}));
  EXPECT_EQ(llm.mutation_calls, 1);  // later rounds start from a perfect seed
  EXPECT_TRUE(r.solved);
  EXPECT_EQ(r.hidden_eval_count, 1);
  EXPECT_EQ(r.plan["self_built_inputs"].size(), 10u);
  int proposals = 0;
  for (const auto& e : r.events) proposals += e.kind == EventKind::Proposal;
  EXPECT_EQ(proposals, 5);
}

TEST_F(AutonomousRun, FallsBackToDomainSamplesWhenProposalsFail) {
  AutoClient llm;  // every proposal response is empty
  auto cfg = testing::prime_config();
  cfg.auto_max_iterations = 4;
  cfg.auto_max_reprompts = 1;
  const auto r = run_autonomous(task, cfg, llm, fx);
  ASSERT_FALSE(r.example_counts.empty());
  EXPECT_EQ(r.example_counts.front(), 2u);
  bool fallback = false;
  for (const auto& e : r.events) fallback = fallback || e.outcome == Outcome::Fallback;
  EXPECT_TRUE(fallback);
  EXPECT_EQ(r.hidden_eval_count, 1);
}

TEST_F(AutonomousRun, IsDeterministic) {
  auto run = [&] {
    AutoClient llm;
    auto cfg = testing::prime_config();
    cfg.auto_max_iterations = 6;
    return to_json(run_autonomous(task, cfg, llm, fx)).dump();
  };
  EXPECT_EQ(run(), run());
}

}  // namespace
}  // namespace dio
