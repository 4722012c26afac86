#include "dio/scoring.hpp"

#include <algorithm>

#include "dio/source_text.hpp"

namespace dio {

double omega_comp(std::string_view source) {
  const auto n = lexemes(source).size();
  return std::min(1.0, static_cast<double>(n) / static_cast<double>(kLexemeCap));
}

bool literal_copied(std::string_view compact_source, const Example& e) {
  for (const auto* v : {&e.input, &e.output}) {
    const auto lit = remove_whitespace(literal_form(*v));
    if (lit.size() >= kMinLiteralChars && compact_source.find(lit) != std::string_view::npos) return true;
  }
  return false;
}

double omega_hard(std::string_view source, std::span<const Example> examples) {
  if (examples.empty()) return 0.0;
  const auto compact = remove_whitespace(strip_comments(source));
  std::size_t hits = 0;
  for (const auto& e : examples) hits += literal_copied(compact, e) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(examples.size());
}

StageScore make_stage_score(double acc, double omega_c, double omega_h, double lambda_c, double lambda_h) {
  StageScore s;
  s.acc_curr = acc;
  s.omega_comp = omega_c;
  s.omega_hard = omega_h;
  s.lambda_c = lambda_c;
  s.lambda_h = lambda_h;
  s.total = acc - lambda_c * omega_c - lambda_h * omega_h;
  return s;
}

std::string_view to_string(Origin o) noexcept { return o == Origin::Current ? "current" : "replay"; }

EvalReport evaluate(std::string_view source, std::string_view function_name, std::span<const Example> examples,
                    Executor& executor, Origin origin, const EvalOptions& opts) {
  EvalReport r;
  r.total = static_cast<int>(examples.size());
  if (examples.empty()) return r;

  ExecJob job;
  job.program_source = std::string(source);
  job.function_name = std::string(function_name);
  job.timeout_ms = opts.timeout_ms;
  job.memory_cap_mb = opts.memory_cap_mb;
  for (const auto& e : examples) job.cases.push_back(e.input);
  auto res = executor.execute(job);
  r.wall_time_ms = res.wall_time_ms;

  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& got = res.per_case[i];
    if (got.is_ok() && values_equal(got.value, examples[i].output, opts.float_tol)) {
      ++r.correct;
    } else if (r.failures.size() < kMaxFailures) {
      std::string note = got.is_ok() ? "wrong output" : std::string(to_string(got.status));
      r.failures.push_back({origin, examples[i].input, examples[i].output, got, std::move(note)});
    }
  }
  r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.total);
  return r;
}

double fitness(std::string_view source, std::string_view function_name, std::span<const Example> examples,
               Executor& executor, const EvalOptions& opts) {
  return evaluate(source, function_name, examples, executor, Origin::Current, opts).accuracy;
}

StageEvaluation stage_score(std::string_view source, std::string_view function_name, const StageSlice& slice,
                            Executor& executor, double lambda_c, double lambda_h, const EvalOptions& opts) {
  StageEvaluation ev;
  ev.current = evaluate(source, function_name, slice.current, executor, Origin::Current, opts);
  ev.replay = evaluate(source, function_name, slice.replay, executor, Origin::Replay, opts);
  ev.score = make_stage_score(ev.current.accuracy, omega_comp(source), omega_hard(source, slice.current), lambda_c,
                              lambda_h);
  return ev;
}

EvalReport heldout_eval(std::string_view source, const Task& task, Executor& executor, const EvalOptions& opts) {
  return evaluate(source, task.function_name, task.hidden, executor, Origin::Current, opts);
}

nlohmann::ordered_json to_json(const StageScore& s) {
  nlohmann::ordered_json j;
  j["acc_curr"] = s.acc_curr;
  j["omega_comp"] = s.omega_comp;
  j["omega_hard"] = s.omega_hard;
  j["lambda_c"] = s.lambda_c;
  j["lambda_h"] = s.lambda_h;
  j["total"] = s.total;
  return j;
}

StageScore stage_score_from_json(const nlohmann::json& j) {
  StageScore s;
  s.acc_curr = j.at("acc_curr").get<double>();
  s.omega_comp = j.at("omega_comp").get<double>();
  s.omega_hard = j.at("omega_hard").get<double>();
  s.lambda_c = j.at("lambda_c").get<double>();
  s.lambda_h = j.at("lambda_h").get<double>();
  s.total = j.at("total").get<double>();
  return s;
}

nlohmann::ordered_json to_json(const FailureArtifact& f) {
  nlohmann::ordered_json j;
  j["origin"] = to_string(f.origin);
  j["input"] = to_tagged_json(f.input);
  j["expected"] = to_tagged_json(f.expected);
  j["got"] = outcome_to_json(f.got);
  j["note"] = f.note;
  return j;
}

FailureArtifact failure_from_json(const nlohmann::json& j) {
  FailureArtifact f;
  f.origin = j.at("origin").get<std::string>() == "replay" ? Origin::Replay : Origin::Current;
  f.input = from_tagged_json(j.at("input"));
  f.expected = from_tagged_json(j.at("expected"));
  f.got = outcome_from_json(j.at("got"));
  f.note = j.value("note", std::string{});
  return f;
}

nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["correct"] = r.correct;
  j["total"] = r.total;
  j["accuracy"] = r.accuracy;
  auto fs = nlohmann::ordered_json::array();
  for (const auto& f : r.failures) fs.push_back(to_json(f));
  j["failures"] = std::move(fs);
  return j;
}

EvalReport eval_report_from_json(const nlohmann::json& j) {
  EvalReport r;
  r.correct = j.at("correct").get<int>();
  r.total = j.at("total").get<int>();
  r.accuracy = j.at("accuracy").get<double>();
  for (const auto& f : j.at("failures")) r.failures.push_back(failure_from_json(f));
  return r;
}

}  // namespace dio
