#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "dio/task_catalog.hpp"

namespace dio {

struct DifficultyKey {
  std::int64_t total_size = 0;
  std::int64_t total_depth = 0;
  std::string tiebreak;

  friend auto operator<=>(const DifficultyKey&, const DifficultyKey&) = default;
  friend bool operator==(const DifficultyKey&, const DifficultyKey&) = default;
};

/// Sizes and depths of input and output summed; the input literal breaks ties.
DifficultyKey difficulty_key(const Example& e);

/// One curriculum stage. The *_idx vectors index into the task's visible list.
struct StageSlice {
  int index = 1;
  std::vector<Example> current;
  std::vector<Example> delta;
  std::vector<Example> replay;
  std::vector<std::size_t> current_idx;
  std::vector<std::size_t> delta_idx;
  std::vector<std::size_t> replay_idx;
};

struct CurriculumPlan {
  int stage_count = 0;
  std::uint64_t seed = 0;
  std::size_t replay_cap = 0;
  std::vector<std::size_t> order;  // visible indices, easiest first
  std::vector<StageSlice> stages;
};

inline constexpr std::size_t kDefaultReplayCap = 4;

/// Stable sort by difficulty_key, nested prefixes of ceil(n*s/S) examples and
/// a seeded replay sample from the previous prefix. Throws InvalidStageCount
/// unless 1 <= S <= n.
CurriculumPlan build_plan(const std::vector<Example>& visible, int stage_count,
                          std::size_t replay_cap = kDefaultReplayCap, std::uint64_t seed = 0);

/// Indices only, plus the seed; the examples live in the task.
nlohmann::ordered_json plan_to_json(const CurriculumPlan& plan);

}  // namespace dio
