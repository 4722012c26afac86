#include "dio/curriculum.hpp"

#include <algorithm>
#include <numeric>

#include "dio/error.hpp"
#include "dio/rng.hpp"

namespace dio {

DifficultyKey difficulty_key(const Example& e) {
  const auto in = size_and_depth(e.input);
  const auto out = size_and_depth(e.output);
  return {in.node_count + out.node_count, in.depth + out.depth, literal_form(e.input)};
}

CurriculumPlan build_plan(const std::vector<Example>& visible, int stage_count, std::size_t replay_cap,
                          std::uint64_t seed) {
  const auto n = visible.size();
  if (stage_count < 1 || static_cast<std::size_t>(stage_count) > n) {
    throw InvalidStageCount("S=" + std::to_string(stage_count) + " with " + std::to_string(n) + " examples");
  }
  CurriculumPlan plan;
  plan.stage_count = stage_count;
  plan.seed = seed;
  plan.replay_cap = replay_cap;

  std::vector<DifficultyKey> keys;
  keys.reserve(n);
  for (const auto& e : visible) keys.push_back(difficulty_key(e));
  plan.order.resize(n);
  std::iota(plan.order.begin(), plan.order.end(), std::size_t{0});
  std::stable_sort(plan.order.begin(), plan.order.end(),
                   [&keys](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });

  const auto S = static_cast<std::size_t>(stage_count);
  std::size_t prev = 0;
  for (std::size_t s = 1; s <= S; ++s) {
    const std::size_t size = (n * s + S - 1) / S;
    StageSlice slice;
    slice.index = static_cast<int>(s);
    for (std::size_t k = 0; k < size; ++k) {
      const auto idx = plan.order[k];
      slice.current_idx.push_back(idx);
      slice.current.push_back(visible[idx]);
      if (k >= prev) {
        slice.delta_idx.push_back(idx);
        slice.delta.push_back(visible[idx]);
      }
    }
    if (prev > 0) {
      Rng rng(derive_seed(seed, 0x5265706c6179ULL, s));
      for (auto k : rng.sample_indices(prev, std::min(replay_cap, prev))) {
        const auto idx = plan.order[k];
        slice.replay_idx.push_back(idx);
        slice.replay.push_back(visible[idx]);
      }
    }
    plan.stages.push_back(std::move(slice));
    prev = size;
  }
  return plan;
}

nlohmann::ordered_json plan_to_json(const CurriculumPlan& plan) {
  nlohmann::ordered_json j;
  j["stage_count"] = plan.stage_count;
  j["seed"] = plan.seed;
  j["replay_cap"] = plan.replay_cap;
  j["order"] = plan.order;
  auto stages = nlohmann::ordered_json::array();
  for (const auto& s : plan.stages) {
    nlohmann::ordered_json o;
    o["index"] = s.index;
    o["current"] = s.current_idx;
    o["delta"] = s.delta_idx;
    o["replay"] = s.replay_idx;
    stages.push_back(std::move(o));
  }
  j["stages"] = std::move(stages);
  return j;
}

}  // namespace dio
