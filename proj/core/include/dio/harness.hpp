#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dio/engine.hpp"

namespace dio {

enum class Mode { DIO, Ablate_CE, Ablate_TPP, Ablate_EF, FlatEvolve };
enum class TtsVariant { Direct, BestOfN, SelfConsistency };

/// CLI spellings: dio, ablate-ce, ablate-tpp, ablate-ef, flat; direct, bon, sc.
std::string_view to_string(Mode m) noexcept;
std::string_view to_string(TtsVariant v) noexcept;
Mode mode_from_string(std::string_view s);  // throws ConfigError
TtsVariant tts_from_string(std::string_view s);

/// Ablate_CE: one stage. Ablate_TPP: no TPP block. Ablate_EF: scores only.
/// FlatEvolve: all three.
EngineConfig apply_mode(EngineConfig c, Mode m);

/// Iterations at which flat runs are checkpointed.
inline constexpr std::array<int, 4> kFlatCheckpoints{3, 6, 12, 20};

enum class TrajectoryClass { Stable, MonotoneDown, Hump, MonotoneUp, Valley, Mixed };
std::string_view to_string(TrajectoryClass c) noexcept;
inline constexpr std::array<TrajectoryClass, 6> kAllTrajectories{
    TrajectoryClass::Stable, TrajectoryClass::MonotoneDown, TrajectoryClass::Hump,
    TrajectoryClass::MonotoneUp, TrajectoryClass::Valley, TrajectoryClass::Mixed};

/// Stable when max - min <= eps_frac * |mean|; then monotone checks; then a
/// single turning point (Hump or Valley); otherwise Mixed. Throws
/// InvalidSequence for fewer than two values.
TrajectoryClass classify_trajectory(std::span<const double> lengths, double eps_frac = 0.1);

struct FamilyOverfit {
  Family family = Family::Core;
  int runs = 0;
  int solved = 0;
  int curriculum_perfect_hidden_failed = 0;
  int early_stop_incorrect = 0;
  double mean_length_solved = 0;
  double mean_length_failed = 0;
  double copy_frequency = 0;  // mean over runs
};

/// Visible accuracy 1.0 with hidden accuracy below 1.0.
bool is_curriculum_perfect_hidden_failed(const RunRecord& r) noexcept;
/// Search stopped early on a perfect visible score yet the hidden set fails.
bool is_early_stop_incorrect(const RunRecord& r) noexcept;

std::vector<FamilyOverfit> overfit_diagnostics(std::span<const RunRecord> records);

struct CurvePoint {
  std::string label;
  int at = 0;
  double mean_sample_pass_ratio = 0;
  int tasks = 0;
  int improved = 0;
  int regressed = 0;
};

struct LevelStats {
  int tasks = 0;
  int solved = 0;
  double pass_rate = 0;
  double mean_sample_pass_ratio = 0;
};

struct SuiteReport {
  std::string mode;
  bool curriculum = true;
  bool tpp = true;
  bool feedback = true;
  int stages = 0;
  std::vector<RunRecord> records;
  std::map<Level, LevelStats> levels;
  LevelStats overall;
  double token_per_iter = 0;
  std::vector<CurvePoint> curve;
  std::map<TrajectoryClass, int> trajectories;
  std::vector<FamilyOverfit> overfit;
  int infrastructure_failures = 0;
};

/// Aggregates finished records; used by run_suite and by report merging.
SuiteReport summarize(std::vector<RunRecord> records, std::string mode_label);

struct SuiteOptions {
  std::optional<std::filesystem::path> out_dir;  // writes runs/<id>/ and report.json
  int workers = 1;
};

SuiteReport run_suite(const std::vector<Task>& tasks, const EngineConfig& config, Mode mode, LlmClient& llm,
                      Executor& executor, const SuiteOptions& opts = {});

/// Runs run_autonomous per task.
SuiteReport run_autonomous_suite(const std::vector<Task>& tasks, const EngineConfig& config, LlmClient& llm,
                                 Executor& executor, const SuiteOptions& opts = {});

/// Independent sampling baselines. Direct draws one sample.
SuiteReport run_tts_baselines(const std::vector<Task>& tasks, int n, TtsVariant variant, const EngineConfig& config,
                              LlmClient& llm, Executor& executor, const SuiteOptions& opts = {});

/// Deterministic JSON (records referenced by task id, not embedded).
nlohmann::ordered_json to_json(const SuiteReport& s);
std::string report_json(const SuiteReport& s);

/// One row per report: mode, per-level pass rates, average, token/iter.
std::string ablation_csv(std::span<const SuiteReport> reports);
/// One row per task: id, family, level, stage lengths, label, solved.
std::string trajectory_csv(const SuiteReport& s);

/// Writes report.json, ablation.csv, trajectory.csv and overfit.csv into `dir`.
void write_suite_outputs(const SuiteReport& s, const std::filesystem::path& dir);

}  // namespace dio
