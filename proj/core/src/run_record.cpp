#include "dio/run_record.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include "dio/error.hpp"

namespace dio {

namespace {

constexpr std::array<std::pair<EventKind, std::string_view>, 3> kKinds{{
    {EventKind::Mutation, "mutation"},
    {EventKind::Migration, "migration"},
    {EventKind::Proposal, "proposal"},
}};

constexpr std::array<std::pair<Outcome, std::string_view>, 8> kOutcomes{{
    {Outcome::Inserted, "Inserted"},
    {Outcome::DuplicateRejected, "DuplicateRejected"},
    {Outcome::OutcompetedRejected, "OutcompetedRejected"},
    {Outcome::LlmFailed, "LlmFailed"},
    {Outcome::ParseFailed, "ParseFailed"},
    {Outcome::DiffFailed, "DiffFailed"},
    {Outcome::Proposed, "Proposed"},
    {Outcome::Fallback, "Fallback"},
}};

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& t, E e) {
  for (const auto& [k, n] : t) {
    if (k == e) return n;
  }
  return "?";
}

template <typename E, std::size_t N>
E parse_name(const std::array<std::pair<E, std::string_view>, N>& t, std::string_view s) {
  for (const auto& [k, n] : t) {
    if (n == s) return k;
  }
  throw std::invalid_argument("unknown name: " + std::string(s));
}

nlohmann::ordered_json to_json(const StageRecord& s) {
  nlohmann::ordered_json j;
  j["stage"] = s.stage;
  j["current"] = s.current_idx;
  j["delta"] = s.delta_idx;
  j["replay"] = s.replay_idx;
  j["budget"] = s.budget;
  j["iterations_run"] = s.iterations_run;
  j["early_exit"] = s.early_exit;
  j["seed_id"] = s.seed_id;
  j["best_id"] = s.best_id;
  j["best_score"] = to_json(s.best_score);
  j["best_length"] = s.best_length;
  return j;
}

StageRecord stage_record_from_json(const nlohmann::json& j) {
  StageRecord s;
  s.stage = j.at("stage").get<int>();
  s.current_idx = j.at("current").get<std::vector<std::size_t>>();
  s.delta_idx = j.at("delta").get<std::vector<std::size_t>>();
  s.replay_idx = j.at("replay").get<std::vector<std::size_t>>();
  s.budget = j.at("budget").get<int>();
  s.iterations_run = j.at("iterations_run").get<int>();
  s.early_exit = j.at("early_exit").get<bool>();
  s.seed_id = j.at("seed_id").get<std::string>();
  s.best_id = j.at("best_id").get<std::string>();
  s.best_score = stage_score_from_json(j.at("best_score"));
  s.best_length = j.at("best_length").get<std::size_t>();
  return s;
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("experiment_harness", "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string_view to_string(EventKind k) noexcept { return name_of(kKinds, k); }
std::string_view to_string(Outcome o) noexcept { return name_of(kOutcomes, o); }
EventKind event_kind_from_string(std::string_view s) { return parse_name(kKinds, s); }
Outcome outcome_from_string(std::string_view s) { return parse_name(kOutcomes, s); }

nlohmann::ordered_json to_json(const IterationEvent& e) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(e.kind);
  j["iter"] = e.iter;
  j["stage"] = e.stage;
  j["island"] = e.island;
  j["parent_id"] = e.parent_id;
  j["child_id"] = e.child_id;
  j["outcome"] = to_string(e.outcome);
  j["phase"] = e.phase;
  j["detail"] = e.detail;
  j["score"] = e.score ? to_json(*e.score) : nlohmann::ordered_json(nullptr);
  j["replay_accuracy"] = e.replay_accuracy ? nlohmann::ordered_json(*e.replay_accuracy) : nlohmann::ordered_json(nullptr);
  j["prompt_tokens"] = e.prompt_tokens;
  j["completion_tokens"] = e.completion_tokens;
  return j;
}

IterationEvent event_from_json(const nlohmann::json& j) {
  IterationEvent e;
  e.kind = event_kind_from_string(j.at("kind").get<std::string>());
  e.iter = j.at("iter").get<int>();
  e.stage = j.at("stage").get<int>();
  e.island = j.at("island").get<int>();
  e.parent_id = j.at("parent_id").get<std::string>();
  e.child_id = j.at("child_id").get<std::string>();
  e.outcome = outcome_from_string(j.at("outcome").get<std::string>());
  e.phase = j.at("phase").get<std::string>();
  e.detail = j.at("detail").get<std::string>();
  if (!j.at("score").is_null()) e.score = stage_score_from_json(j["score"]);
  if (!j.at("replay_accuracy").is_null()) e.replay_accuracy = j["replay_accuracy"].get<double>();
  e.prompt_tokens = j.at("prompt_tokens").get<std::int64_t>();
  e.completion_tokens = j.at("completion_tokens").get<std::int64_t>();
  return e;
}

std::vector<double> RunRecord::stage_lengths() const {
  std::vector<double> out;
  for (const auto& s : stages) out.push_back(static_cast<double>(s.best_length));
  return out;
}

double RunRecord::token_per_iter() const {
  if (mutation_calls == 0) return 0.0;
  return static_cast<double>(prompt_tokens + completion_tokens) / static_cast<double>(mutation_calls);
}

nlohmann::ordered_json to_json(const RunRecord& r) {
  nlohmann::ordered_json j;
  j["task_id"] = r.task_id;
  j["family"] = to_string(r.family);
  j["level"] = to_string(r.level);
  j["function_name"] = r.function_name;
  j["mode"] = r.mode;
  j["config"] = r.config;
  j["prompt_sha256"] = r.prompt_sha256;
  j["plan"] = r.plan;
  auto stages = nlohmann::ordered_json::array();
  for (const auto& s : r.stages) stages.push_back(to_json(s));
  j["stages"] = std::move(stages);
  auto best = nlohmann::ordered_json::array();
  for (const auto& [iter, id] : r.best_by_iter) best.push_back({iter, id});
  j["best_by_iter"] = std::move(best);
  j["final_id"] = r.final_id;
  j["final_source"] = r.final_source;
  j["visible_accuracy"] = r.visible_accuracy;
  j["copy_frequency"] = r.copy_frequency;
  j["hidden"] = to_json(r.hidden);
  j["hidden_eval_count"] = r.hidden_eval_count;
  j["solved"] = r.solved;
  j["iterations_run"] = r.iterations_run;
  j["llm_calls"] = r.llm_calls;
  j["mutation_calls"] = r.mutation_calls;
  j["prompt_tokens"] = r.prompt_tokens;
  j["completion_tokens"] = r.completion_tokens;
  j["token_per_iter"] = r.token_per_iter();
  j["example_counts"] = r.example_counts;
  auto cps = nlohmann::ordered_json::array();
  for (const auto& c : r.checkpoints) {
    nlohmann::ordered_json o;
    o["label"] = c.label;
    o["at"] = c.at;
    o["candidate_id"] = c.candidate_id;
    o["hidden_accuracy"] = c.hidden_accuracy;
    cps.push_back(std::move(o));
  }
  j["checkpoints"] = std::move(cps);
  j["error"] = r.error;
  auto events = nlohmann::ordered_json::array();
  for (const auto& e : r.events) events.push_back(to_json(e));
  j["events"] = std::move(events);
  nlohmann::ordered_json sources = nlohmann::ordered_json::object();
  for (const auto& [id, src] : r.sources) sources[id] = src;
  j["sources"] = std::move(sources);
  return j;
}

RunRecord run_record_from_json(const nlohmann::json& j) {
  RunRecord r;
  r.task_id = j.at("task_id").get<std::string>();
  r.family = family_from_string(j.at("family").get<std::string>());
  r.level = level_from_string(j.at("level").get<std::string>());
  r.function_name = j.at("function_name").get<std::string>();
  r.mode = j.at("mode").get<std::string>();
  r.config = j.at("config");
  r.prompt_sha256 = j.at("prompt_sha256").get<std::string>();
  r.plan = j.at("plan");
  for (const auto& s : j.at("stages")) r.stages.push_back(stage_record_from_json(s));
  for (const auto& b : j.at("best_by_iter")) r.best_by_iter.emplace_back(b.at(0).get<int>(), b.at(1).get<std::string>());
  r.final_id = j.at("final_id").get<std::string>();
  r.final_source = j.at("final_source").get<std::string>();
  r.visible_accuracy = j.at("visible_accuracy").get<double>();
  r.copy_frequency = j.at("copy_frequency").get<double>();
  r.hidden = eval_report_from_json(j.at("hidden"));
  r.hidden_eval_count = j.at("hidden_eval_count").get<int>();
  r.solved = j.at("solved").get<bool>();
  r.iterations_run = j.at("iterations_run").get<int>();
  r.llm_calls = j.at("llm_calls").get<std::int64_t>();
  r.mutation_calls = j.at("mutation_calls").get<std::int64_t>();
  r.prompt_tokens = j.at("prompt_tokens").get<std::int64_t>();
  r.completion_tokens = j.at("completion_tokens").get<std::int64_t>();
  r.example_counts = j.at("example_counts").get<std::vector<std::size_t>>();
  for (const auto& c : j.at("checkpoints")) {
    r.checkpoints.push_back({c.at("label").get<std::string>(), c.at("at").get<int>(),
                             c.at("candidate_id").get<std::string>(), c.at("hidden_accuracy").get<double>()});
  }
  r.error = j.at("error").get<std::string>();
  for (const auto& e : j.at("events")) r.events.push_back(event_from_json(e));
  for (const auto& [id, src] : j.at("sources").items()) r.sources[id] = src.get<std::string>();
  return r;
}

std::string events_jsonl(const RunRecord& r) {
  std::string out;
  for (const auto& e : r.events) out += to_json(e).dump() + "\n";
  return out;
}

void write_text_file(const std::filesystem::path& path, std::string_view content, std::string_view component) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError(std::string(component), "cannot create " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(std::string(component), "cannot write " + path.string());
  out << content;
  out.flush();
  if (!out) throw IoError(std::string(component), "short write to " + path.string());
}

void write_run_dir(const RunRecord& r, const std::filesystem::path& dir) {
  for (const auto& [id, src] : r.sources) write_text_file(dir / "candidates" / (id + ".src"), src, "evolution_engine");
  write_text_file(dir / "events.jsonl", events_jsonl(r), "evolution_engine");
  write_text_file(dir / "report.json", to_json(r).dump(2) + "\n", "evolution_engine");
}

RunRecord read_run_dir(const std::filesystem::path& dir) {
  const auto text = read_text(dir / "report.json");
  const auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw IoError("experiment_harness", "malformed report.json in " + dir.string());
  try {
    return run_record_from_json(j);
  } catch (const std::exception& e) {
    throw IoError("experiment_harness", dir.string() + ": " + e.what());
  }
}

}  // namespace dio
