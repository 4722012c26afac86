#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dio/value.hpp"

namespace dio {

struct CaseOutcome {
  enum class Status { Ok, GuestError, Timeout };

  Status status = Status::GuestError;
  Value value;          // Ok only
  std::string message;  // GuestError only

  static CaseOutcome ok(Value v) { return {Status::Ok, std::move(v), {}}; }
  static CaseOutcome error(std::string msg) { return {Status::GuestError, Value(), std::move(msg)}; }
  static CaseOutcome timeout() { return {Status::Timeout, Value(), {}}; }

  bool is_ok() const noexcept { return status == Status::Ok; }
  friend bool operator==(const CaseOutcome& a, const CaseOutcome& b);
};

std::string_view to_string(CaseOutcome::Status s) noexcept;

/// Wire form of one result: {"status":"ok","value":...} | {"status":"error","message":...} | {"status":"timeout"}.
nlohmann::ordered_json outcome_to_json(const CaseOutcome& o);
CaseOutcome outcome_from_json(const nlohmann::json& j);  // throws std::invalid_argument

/// Human-readable rendering for prompts and logs.
std::string describe(const CaseOutcome& o);

inline constexpr int kDefaultTimeoutMs = 2000;
inline constexpr int kDefaultMemoryCapMb = 256;
inline constexpr std::size_t kGuestTextCap = 2048;

struct ExecJob {
  std::string program_source;
  std::string function_name = "f";
  std::vector<Value> cases;
  int timeout_ms = kDefaultTimeoutMs;
  int memory_cap_mb = kDefaultMemoryCapMb;
};

struct ExecResult {
  std::vector<CaseOutcome> per_case;
  std::int64_t wall_time_ms = 0;
};

/// Runs candidate programs. Implementations must be callable from several
/// threads at once. Infrastructure failures throw BackendUnavailable; guest
/// failures are reported per case.
class Executor {
 public:
  virtual ~Executor() = default;
  virtual ExecResult execute(const ExecJob& job) = 0;
};

// ---- wire protocol ---------------------------------------------------------

/// One request line (no trailing newline).
std::string encode_request(const ExecJob& job);

/// Parses a runner's response line. Anything malformed, or a result count
/// that differs from `n_cases`, throws std::invalid_argument.
ExecResult decode_response(std::string_view line, std::size_t n_cases);

/// Cuts `text` to kGuestTextCap bytes, marking the cut.
std::string truncate_guest_text(std::string text);

// ---- table-driven fake -----------------------------------------------------

/// Answers from a table keyed by (source_hash, serialized input). Entries that
/// are missing come back as GuestError("untabulated").
class FakeExecutor final : public Executor {
 public:
  using Mirror = std::function<CaseOutcome(const Value&)>;

  void add(const std::string& source_hash, const Value& input, CaseOutcome outcome);

  /// Fills the table for `source` by running a native mirror of the program.
  void tabulate(std::string_view source, const std::vector<Value>& inputs, const Mirror& mirror);

  ExecResult execute(const ExecJob& job) override;

  std::size_t size() const noexcept { return table_.size(); }
  std::size_t calls() const noexcept { return calls_.load(); }

  /// {"entries":[{"source_hash","input","outcome"}...]}, entries sorted by key.
  nlohmann::ordered_json to_json() const;
  static FakeExecutor from_json(const nlohmann::json& j);
  static FakeExecutor load(const std::filesystem::path& file);  // throws IoError

  FakeExecutor() = default;
  FakeExecutor(const FakeExecutor& other) : table_(other.table_) {}
  FakeExecutor& operator=(const FakeExecutor& other) {
    table_ = other.table_;
    return *this;
  }

 private:
  std::map<std::pair<std::string, std::string>, CaseOutcome> table_;
  std::atomic<std::size_t> calls_{0};
};

// ---- subprocess runner -----------------------------------------------------

struct SubprocessOptions {
  std::vector<std::string> argv;  // runner command line, e.g. {"python3", "runner.py"}
  int grace_ms = 2000;            // added to the per-job hard-kill deadline
};

/// One runner process per job. The process receives one request line on
/// stdin and must print one response line on stdout. A job that outlives
/// timeout_ms * cases + grace_ms is killed and every case becomes Timeout.
class SubprocessExecutor final : public Executor {
 public:
  explicit SubprocessExecutor(SubprocessOptions opts);

  ExecResult execute(const ExecJob& job) override;

  const SubprocessOptions& options() const noexcept { return opts_; }

 private:
  SubprocessOptions opts_;
};

/// Splits a command string on whitespace (no quoting rules).
std::vector<std::string> split_command(std::string_view cmd);

}  // namespace dio
