#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dio/curriculum.hpp"
#include "dio/executor.hpp"
#include "dio/llm.hpp"
#include "dio/mutation.hpp"
#include "dio/rng.hpp"
#include "dio/run_record.hpp"
#include "dio/scoring.hpp"
#include "dio/task_catalog.hpp"

namespace dio {

struct SamplingMix {
  double p_random = 0.2;
  double p_best = 0.4;
  double p_weighted = 0.4;
  friend bool operator==(const SamplingMix&, const SamplingMix&) = default;
};

struct EngineConfig {
  int islands = 3;
  int total_iterations = 20;
  int stages = 4;
  int migration_period = 5;
  SamplingMix mix;
  double lambda_c = kDefaultLambda;
  double lambda_h = kDefaultLambda;
  int timeout_ms = kDefaultTimeoutMs;
  int memory_cap_mb = kDefaultMemoryCapMb;
  std::uint64_t seed = 0;
  std::size_t population_cap = 16;
  std::size_t replay_cap = kDefaultReplayCap;
  double softmax_temperature = 1.0;
  double llm_temperature = 0.8;
  int max_tokens = 2048;
  std::string model;
  bool use_tpp = true;
  bool use_feedback = true;
  bool parallel_islands = false;
  // Autonomous discovery.
  int auto_max_iterations = 50;
  int auto_initial_examples = 2;
  int auto_step = 2;
  int auto_patience = 5;
  int auto_max_reprompts = 3;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  friend bool operator==(const EngineConfig&, const EngineConfig&) = default;
};

nlohmann::ordered_json to_json(const EngineConfig& c);
/// Fields absent from `j` keep their defaults; unknown keys throw ConfigError.
EngineConfig engine_config_from_json(const nlohmann::json& j, EngineConfig base = {});

/// Even split of `total` over `stages`; earlier stages absorb any remainder.
std::vector<int> split_budget(int total, int stages);

/// Stage-1 starting point for every task.
std::string initial_program(std::string_view function_name);

struct Candidate {
  std::string id;
  std::string source;
  std::string source_hash;
  int island = 0;
  int stage = 0;
  std::optional<std::string> parent_id;
  StageScore score;
  EvalReport current;
  EvalReport replay;
  int created_iter = 0;
};

struct Island {
  int index = 0;
  std::vector<Candidate> population;
  std::uint64_t rng_seed = 0;
};

/// Strict ranking: higher total, then shorter source, then earlier
/// created_iter, then smaller id.
bool ranks_above(const Candidate& a, const Candidate& b) noexcept;
const Candidate& best_of(std::span<const Candidate> pop);

const Candidate& sample_parent(const Island& island, const SamplingMix& mix, Rng& rng,
                               double temperature = 1.0);

struct ContextPick {
  const Candidate* parent = nullptr;
  std::vector<const Candidate*> best_two;
  const Candidate* inspiration = nullptr;
};

/// Parent, the two best others, and a random inspiration distinct from all of
/// them when the population allows; members are reused otherwise.
ContextPick build_context(const Candidate& parent, const Island& island, Rng& rng);

enum class InsertOutcome { Inserted, DuplicateRejected, OutcompetedRejected };
std::string_view to_string(InsertOutcome o) noexcept;

InsertOutcome insert_child(Island& island, Candidate child, std::size_t cap = 16);

/// Ring migration when iter % period == 0: each island's best is offered to
/// the next island as a clone with a fresh id.
std::vector<IterationEvent> migrate(std::vector<Island>& islands, int period, int iter, int stage,
                                    std::size_t cap = 16, std::vector<Candidate>* clones = nullptr);

struct StageResult {
  Candidate best;
  std::vector<IterationEvent> events;
  int iterations_run = 0;
  bool early_exit = false;
};

/// One curriculum stage with a fresh archive. `final_stage` enables the
/// early exit on a perfect slice accuracy.
StageResult run_stage(const Task& task, const StageSlice& slice, const std::string& seed_program,
                      const EngineConfig& config, LlmClient& llm, Executor& executor, int budget,
                      bool final_stage = true);

/// Curriculum over the visible set, then one held-out evaluation.
RunRecord run_task(const Task& task, const EngineConfig& config, LlmClient& llm, Executor& executor);

/// Self-built example set: the LLM proposes inputs, the oracle labels them.
RunRecord run_autonomous(const Task& task, const EngineConfig& config, LlmClient& llm, Executor& executor);

/// Human-readable domain description used in proposal prompts.
std::string describe_domain(const InputDomain& d);

/// Parses proposed inputs (one literal per line, fenced block preferred) and
/// keeps those that fit the oracle domain and are new. Rejections are
/// appended to `rejected` as InvalidProposedInput messages.
std::vector<Value> accept_proposals(std::string_view response, const OracleSpec& oracle,
                                    const std::vector<Value>& existing, std::size_t want,
                                    std::vector<std::string>* rejected = nullptr);

}  // namespace dio
