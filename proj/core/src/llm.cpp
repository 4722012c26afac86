#include <fstream>

#include <json.hpp>

#include "dio/error.hpp"
#include "dio/llm.hpp"

namespace dio {

void UsageLedger::record(int iteration, std::int64_t prompt_tokens, std::int64_t completion_tokens) {
  std::lock_guard lock(mu_);
  for (auto* b : {&totals_, &buckets_[iteration]}) {
    b->prompt_tokens += prompt_tokens;
    b->completion_tokens += completion_tokens;
    b->calls += 1;
  }
}

void UsageLedger::record_retry() {
  std::lock_guard lock(mu_);
  ++retries_;
}

UsageBucket UsageLedger::totals() const {
  std::lock_guard lock(mu_);
  return totals_;
}

std::int64_t UsageLedger::retries() const {
  std::lock_guard lock(mu_);
  return retries_;
}

std::map<int, UsageBucket> UsageLedger::buckets() const {
  std::lock_guard lock(mu_);
  return buckets_;
}

double UsageLedger::token_per_iter(std::int64_t iterations) const {
  if (iterations <= 0) return 0.0;
  const auto t = totals();
  return static_cast<double>(t.prompt_tokens + t.completion_tokens) / static_cast<double>(iterations);
}

ScriptedMock::ScriptedMock(std::vector<ScriptStep> steps) : steps_(std::move(steps)) {
  if (steps_.empty()) throw MockScriptViolation("empty script");
}

std::unique_ptr<ScriptedMock> ScriptedMock::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("llm_gateway", "cannot open mock script " + file.string());
  std::vector<ScriptStep> steps;
  try {
    const auto j = nlohmann::json::parse(in);
    if (!j.is_array()) throw std::invalid_argument("script must be a JSON array");
    for (const auto& s : j) {
      ScriptStep step;
      step.hint = s.value("hint", std::string{});
      step.response = s.at("response").get<std::string>();
      step.prompt_tokens = s.value("prompt_tokens", std::int64_t{0});
      step.completion_tokens = s.value("completion_tokens", std::int64_t{0});
      steps.push_back(std::move(step));
    }
  } catch (const std::exception& e) {
    throw IoError("llm_gateway", file.string() + ": " + e.what());
  }
  return std::make_unique<ScriptedMock>(std::move(steps));
}

ChatResponse ScriptedMock::complete(const ChatRequest& req) {
  const auto pos = req.ordinal >= 0 ? req.ordinal : reserve_ordinals(1);
  if (pos >= static_cast<std::int64_t>(steps_.size())) {
    throw MockScriptViolation("exhausted (call " + std::to_string(pos) + " of a " + std::to_string(steps_.size()) +
                              "-step script)");
  }
  const auto& step = steps_[static_cast<std::size_t>(pos)];
  if (!step.hint.empty()) {
    bool found = false;
    for (const auto& m : req.messages) found = found || m.content.find(step.hint) != std::string::npos;
    if (!found) {
      throw MockScriptViolation("step " + std::to_string(pos) + ": hint '" + step.hint + "' not in prompt");
    }
  }
  ledger_.record(req.iteration, step.prompt_tokens, step.completion_tokens);
  return {step.response, step.prompt_tokens, step.completion_tokens};
}

}  // namespace dio
