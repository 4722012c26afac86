#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dio/curriculum.hpp"
#include "dio/executor.hpp"
#include "dio/task_catalog.hpp"

namespace dio {

inline constexpr std::size_t kLexemeCap = 512;
inline constexpr std::size_t kMinLiteralChars = 3;
inline constexpr std::size_t kMaxFailures = 3;
inline constexpr double kDefaultLambda = 0.1;

/// min(1, lexemes / 512).
double omega_comp(std::string_view source);

/// True when the input or output literal of `e` (at least three characters)
/// occurs in `compact_source`. Both sides are compared with every whitespace
/// character removed; `compact_source` must already be comment-free and
/// whitespace-free.
bool literal_copied(std::string_view compact_source, const Example& e);

/// Fraction of examples with a copied literal; 0 for an empty set.
double omega_hard(std::string_view source, std::span<const Example> examples);

struct StageScore {
  double acc_curr = 0;
  double omega_comp = 0;
  double omega_hard = 0;
  double lambda_c = kDefaultLambda;
  double lambda_h = kDefaultLambda;
  double total = 0;
};

/// total = acc - lambda_c * omega_comp - lambda_h * omega_hard, evaluated in that order.
StageScore make_stage_score(double acc, double omega_c, double omega_h, double lambda_c = kDefaultLambda,
                            double lambda_h = kDefaultLambda);

enum class Origin { Current, Replay };
std::string_view to_string(Origin o) noexcept;

struct FailureArtifact {
  Origin origin = Origin::Current;
  Value input;
  Value expected;
  CaseOutcome got;
  std::string note;
};

struct EvalReport {
  int correct = 0;
  int total = 0;
  double accuracy = 0;
  std::int64_t wall_time_ms = 0;
  std::vector<FailureArtifact> failures;  // at most kMaxFailures
};

struct EvalOptions {
  int timeout_ms = kDefaultTimeoutMs;
  int memory_cap_mb = kDefaultMemoryCapMb;
  double float_tol = kDefaultFloatTol;
};

/// Runs `source` on every example in one job. Errors and timeouts count as
/// incorrect; BackendUnavailable propagates.
EvalReport evaluate(std::string_view source, std::string_view function_name, std::span<const Example> examples,
                    Executor& executor, Origin origin = Origin::Current, const EvalOptions& opts = {});

/// Visible-set fitness: the fraction of examples answered correctly.
double fitness(std::string_view source, std::string_view function_name, std::span<const Example> examples,
               Executor& executor, const EvalOptions& opts = {});

struct StageEvaluation {
  StageScore score;
  EvalReport current;
  EvalReport replay;  // feedback only, never part of score.total
};

StageEvaluation stage_score(std::string_view source, std::string_view function_name, const StageSlice& slice,
                            Executor& executor, double lambda_c = kDefaultLambda, double lambda_h = kDefaultLambda,
                            const EvalOptions& opts = {});

/// The single held-out evaluation of a run.
EvalReport heldout_eval(std::string_view source, const Task& task, Executor& executor, const EvalOptions& opts = {});

nlohmann::ordered_json to_json(const StageScore& s);
StageScore stage_score_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const FailureArtifact& f);
FailureArtifact failure_from_json(const nlohmann::json& j);
/// Wall time is left out so that records compare byte for byte.
nlohmann::ordered_json to_json(const EvalReport& r);
EvalReport eval_report_from_json(const nlohmann::json& j);

}  // namespace dio
