#include "dio/executor.hpp"

#include <fstream>

#include "dio/error.hpp"
#include "dio/source_text.hpp"

namespace dio {

bool operator==(const CaseOutcome& a, const CaseOutcome& b) {
  if (a.status != b.status) return false;
  switch (a.status) {
    case CaseOutcome::Status::Ok:
      return a.value == b.value;
    case CaseOutcome::Status::GuestError:
      return a.message == b.message;
    case CaseOutcome::Status::Timeout:
      return true;
  }
  return false;
}

std::string_view to_string(CaseOutcome::Status s) noexcept {
  switch (s) {
    case CaseOutcome::Status::Ok:
      return "ok";
    case CaseOutcome::Status::GuestError:
      return "error";
    case CaseOutcome::Status::Timeout:
      return "timeout";
  }
  return "?";
}

nlohmann::ordered_json outcome_to_json(const CaseOutcome& o) {
  nlohmann::ordered_json j;
  j["status"] = to_string(o.status);
  if (o.status == CaseOutcome::Status::Ok) j["value"] = to_tagged_json(o.value);
  if (o.status == CaseOutcome::Status::GuestError) j["message"] = o.message;
  return j;
}

CaseOutcome outcome_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("status") || !j["status"].is_string()) {
    throw std::invalid_argument("result without a status");
  }
  const auto status = j["status"].get<std::string>();
  if (status == "ok") {
    if (!j.contains("value")) throw std::invalid_argument("ok result without a value");
    return CaseOutcome::ok(from_tagged_json(j["value"]));
  }
  if (status == "error") {
    return CaseOutcome::error(j.contains("message") && j["message"].is_string() ? j["message"].get<std::string>()
                                                                                  : std::string("error"));
  }
  if (status == "timeout") return CaseOutcome::timeout();
  throw std::invalid_argument("unknown status: " + status);
}

std::string describe(const CaseOutcome& o) {
  switch (o.status) {
    case CaseOutcome::Status::Ok:
      return literal_form(o.value);
    case CaseOutcome::Status::GuestError:
      return "error: " + o.message;
    case CaseOutcome::Status::Timeout:
      return "timeout";
  }
  return "?";
}

std::string encode_request(const ExecJob& job) {
  nlohmann::ordered_json j;
  j["source"] = job.program_source;
  j["fn"] = job.function_name;
  auto cases = nlohmann::ordered_json::array();
  for (const auto& c : job.cases) cases.push_back(nlohmann::ordered_json(to_tagged_json(c)));
  j["cases"] = std::move(cases);
  j["timeout_ms"] = job.timeout_ms;
  return j.dump();
}

ExecResult decode_response(std::string_view line, std::size_t n_cases) {
  auto j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw std::invalid_argument("response is not a JSON object");
  if (j.contains("fatal")) throw std::invalid_argument("runner fatal: " + j["fatal"].dump());
  if (!j.contains("results") || !j["results"].is_array()) throw std::invalid_argument("response without results");
  const auto& results = j["results"];
  if (results.size() != n_cases) {
    throw std::invalid_argument("expected " + std::to_string(n_cases) + " results, got " +
                                std::to_string(results.size()));
  }
  ExecResult r;
  for (const auto& item : results) {
    auto o = outcome_from_json(item);
    if (o.status == CaseOutcome::Status::GuestError) o.message = truncate_guest_text(std::move(o.message));
    r.per_case.push_back(std::move(o));
  }
  if (j.contains("wall_ms") && j["wall_ms"].is_number()) r.wall_time_ms = j["wall_ms"].get<std::int64_t>();
  return r;
}

std::string truncate_guest_text(std::string text) {
  static constexpr std::string_view kMark = "...[truncated]";
  if (text.size() <= kGuestTextCap) return text;
  text.resize(kGuestTextCap - kMark.size());
  text += kMark;
  return text;
}

void FakeExecutor::add(const std::string& source_hash, const Value& input, CaseOutcome outcome) {
  table_[{source_hash, serialize(input)}] = std::move(outcome);
}

void FakeExecutor::tabulate(std::string_view source, const std::vector<Value>& inputs, const Mirror& mirror) {
  const auto h = source_hash(source);
  for (const auto& x : inputs) add(h, x, mirror(x));
}

ExecResult FakeExecutor::execute(const ExecJob& job) {
  calls_.fetch_add(1);
  const auto h = source_hash(job.program_source);
  ExecResult r;
  r.per_case.reserve(job.cases.size());
  for (const auto& c : job.cases) {
    auto it = table_.find({h, serialize(c)});
    r.per_case.push_back(it == table_.end() ? CaseOutcome::error("untabulated") : it->second);
  }
  return r;
}

nlohmann::ordered_json FakeExecutor::to_json() const {
  auto entries = nlohmann::ordered_json::array();
  for (const auto& [key, outcome] : table_) {
    nlohmann::ordered_json e;
    e["source_hash"] = key.first;
    e["input"] = nlohmann::ordered_json::parse(key.second);
    e["outcome"] = outcome_to_json(outcome);
    entries.push_back(std::move(e));
  }
  nlohmann::ordered_json j;
  j["entries"] = std::move(entries);
  return j;
}

FakeExecutor FakeExecutor::from_json(const nlohmann::json& j) {
  FakeExecutor fx;
  for (const auto& e : j.at("entries")) {
    fx.add(e.at("source_hash").get<std::string>(), from_tagged_json(e.at("input")), outcome_from_json(e.at("outcome")));
  }
  return fx;
}

FakeExecutor FakeExecutor::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("executor_gateway", "cannot open fake-exec table " + file.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const std::exception& e) {
    throw IoError("executor_gateway", file.string() + ": " + e.what());
  }
}

std::vector<std::string> split_command(std::string_view cmd) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : cmd) {
    if (c == ' ' || c == '\t' || c == '\n') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

}  // namespace dio
