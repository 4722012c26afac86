#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dio/curriculum.hpp"
#include "dio/scoring.hpp"

namespace dio {

enum class Phase { Red, Green, Refactor };
std::string_view to_string(Phase p) noexcept;

/// acc < 0.5: Red; acc < 1.0: Green; otherwise Refactor.
Phase select_phase(const StageScore& parent_score) noexcept;

/// What a prompt may know about a candidate.
struct ProgramView {
  std::string id;
  std::string source;
  StageScore score;
};

/// Failure artifacts of one candidate in the lineage, own first.
struct FeedbackBundle {
  std::string candidate_id;
  StageScore score;
  std::vector<FailureArtifact> artifacts;  // at most 3
};

inline constexpr std::size_t kFeedbackDepth = 3;  // self plus two ancestors

struct PromptSwitches {
  bool tpp = true;       // TPP list and phase guidance
  bool feedback = true;  // failure artifacts; scores only when off
};

/// Everything a mutation prompt is built from. Deliberately has no access to
/// a Task: examples come only from the stage slice.
struct PromptContext {
  std::string task_id;
  std::string function_name = "f";
  int stage_count = 1;
  StageSlice slice;
  ProgramView parent;
  std::vector<ProgramView> best_two;
  ProgramView inspiration;
  std::vector<FeedbackBundle> feedback_chain;
  Phase phase = Phase::Red;
  PromptSwitches switches;
};

std::string render_prompt(const PromptContext& ctx);

/// Proposal prompt used by autonomous discovery.
std::string render_proposal_prompt(std::string_view task_id, std::string_view function_name,
                                   std::string_view domain_text, const std::vector<Value>& existing,
                                   std::size_t count);

/// Single-shot synthesis prompt used by the sampling baselines.
std::string render_direct_prompt(std::string_view task_id, std::string_view function_name,
                                 const std::vector<Example>& examples);

/// Raw template bytes and their sha256.
std::string_view prompt_template() noexcept;
const std::string& prompt_template_sha256();

struct DiffBlock {
  std::string search;
  std::string replace;
  friend bool operator==(const DiffBlock&, const DiffBlock&) = default;
};

struct FullRewrite {
  std::string source;
};

struct ParseFailure {
  std::string reason;
};

using ParsedResponse = std::variant<std::vector<DiffBlock>, FullRewrite, ParseFailure>;

/// SEARCH/REPLACE blocks if any are well formed; otherwise the body of the
/// only fenced code block; otherwise ParseFailure.
ParsedResponse parse_response(std::string_view text);

/// The body of the first fenced code block, if any.
std::optional<std::string> first_fenced_block(std::string_view text);

/// Applies blocks in order. Each search text must occur exactly once in the
/// source as patched so far. Throws DiffApplyError.
std::string apply_diffs(std::string source, const std::vector<DiffBlock>& blocks);

}  // namespace dio
