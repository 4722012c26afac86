#pragma once

// Internal: search state shared by run_task and run_autonomous.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dio/engine.hpp"

namespace dio::detail {

class Search {
 public:
  Search(const Task& task, const EngineConfig& cfg, LlmClient& llm, Executor& executor);

  /// Seeds every island with `seed_source`, then runs up to `budget`
  /// iterations. Stage numbering and candidate ids come from slice.index.
  StageResult run_stage(const StageSlice& slice, int stage_count, const std::string& seed_source,
                        const std::optional<std::string>& seed_parent, int budget, bool final_stage);

  /// One non-mutation LLM call (autonomous proposals). Counts toward
  /// llm_calls and tokens but not mutation_calls.
  std::optional<ChatResponse> ask(const std::string& prompt, std::string* error);

  EvalOptions eval_options() const;

  /// Copies counters, archive and events into `r`.
  void fill_record(RunRecord& r) const;

  int global_iter() const noexcept { return global_iter_; }
  std::vector<IterationEvent>& events() noexcept { return events_; }

 private:
  struct StepResult {
    IterationEvent event;
    std::optional<Candidate> child;
  };

  StepResult step(const Island& island, Rng& rng, const StageSlice& slice, int stage_count, int iter,
                  std::int64_t ordinal) const;
  Candidate evaluate(std::string id, std::string source, int island, int stage, std::optional<std::string> parent,
                     const StageSlice& slice, int iter) const;
  std::vector<FeedbackBundle> feedback_chain(const Candidate& parent) const;

  const Task& task_;
  EngineConfig cfg_;
  LlmClient& llm_;
  Executor& executor_;

  int global_iter_ = 0;
  std::int64_t llm_calls_ = 0;
  std::int64_t mutation_calls_ = 0;
  std::int64_t prompt_tokens_ = 0;
  std::int64_t completion_tokens_ = 0;
  std::map<std::string, Candidate> archive_;
  std::vector<IterationEvent> events_;
  std::vector<std::pair<int, std::string>> best_by_iter_;
};

std::string stage_tag(int stage, int island);

/// Final candidate fields plus the run's single held-out evaluation.
void finish_record(RunRecord& r, const Candidate& final, const Task& task, Executor& executor,
                   const EvalOptions& opts);

}  // namespace dio::detail
