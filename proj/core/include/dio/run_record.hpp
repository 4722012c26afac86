#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dio/scoring.hpp"
#include "dio/task_catalog.hpp"

namespace dio {

enum class EventKind { Mutation, Migration, Proposal };
enum class Outcome {
  Inserted,
  DuplicateRejected,
  OutcompetedRejected,
  LlmFailed,
  ParseFailed,
  DiffFailed,
  Proposed,
  Fallback,
};

std::string_view to_string(EventKind k) noexcept;
std::string_view to_string(Outcome o) noexcept;
EventKind event_kind_from_string(std::string_view s);
Outcome outcome_from_string(std::string_view s);

/// One line of events.jsonl.
struct IterationEvent {
  EventKind kind = EventKind::Mutation;
  int iter = 0;
  int stage = 0;
  int island = 0;
  std::string parent_id;
  std::string child_id;
  Outcome outcome = Outcome::Inserted;
  std::string phase;
  std::string detail;
  std::optional<StageScore> score;
  std::optional<double> replay_accuracy;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
};

nlohmann::ordered_json to_json(const IterationEvent& e);
IterationEvent event_from_json(const nlohmann::json& j);

struct StageRecord {
  int stage = 0;
  std::vector<std::size_t> current_idx;
  std::vector<std::size_t> delta_idx;
  std::vector<std::size_t> replay_idx;
  int budget = 0;
  int iterations_run = 0;
  bool early_exit = false;
  std::string seed_id;
  std::string best_id;
  StageScore best_score;
  std::size_t best_length = 0;  // characters
};

/// Diagnostic held-out evaluation of an intermediate best, taken after the
/// search by the harness. Never part of the run's single held-out evaluation.
struct Checkpoint {
  std::string label;  // "stage2", "iter6", ...
  int at = 0;
  std::string candidate_id;
  double hidden_accuracy = 0;
};

struct RunRecord {
  std::string task_id;
  Family family = Family::Core;
  Level level = Level::Base;
  std::string function_name = "f";
  std::string mode = "dio";
  nlohmann::ordered_json config;
  std::string prompt_sha256;
  nlohmann::ordered_json plan;

  std::vector<StageRecord> stages;
  std::vector<IterationEvent> events;
  std::vector<std::pair<int, std::string>> best_by_iter;  // (global iteration, best id)
  std::map<std::string, std::string> sources;             // every evaluated candidate

  std::string final_id;
  std::string final_source;
  double visible_accuracy = 0;
  double copy_frequency = 0;
  EvalReport hidden;
  int hidden_eval_count = 0;
  bool solved = false;

  int iterations_run = 0;
  std::int64_t llm_calls = 0;
  std::int64_t mutation_calls = 0;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;

  std::vector<std::size_t> example_counts;  // autonomous mode
  std::vector<Checkpoint> checkpoints;
  std::string error;  // infrastructure failure that ended the run early

  /// Per-stage best source lengths, in characters.
  std::vector<double> stage_lengths() const;
  double token_per_iter() const;
};

nlohmann::ordered_json to_json(const RunRecord& r);
RunRecord run_record_from_json(const nlohmann::json& j);

std::string events_jsonl(const RunRecord& r);

/// candidates/<id>.src, events.jsonl, report.json. Throws IoError.
void write_run_dir(const RunRecord& r, const std::filesystem::path& dir);
RunRecord read_run_dir(const std::filesystem::path& dir);

/// Writes `content` to `path`, creating parent directories. Throws IoError.
void write_text_file(const std::filesystem::path& path, std::string_view content, std::string_view component);

}  // namespace dio
