#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <vector>

namespace dio {

struct ChatMessage {
  std::string role;
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.8;
  int max_tokens = 2048;
  /// Position of this call in the run's call sequence, or -1. Scripted
  /// clients answer by ordinal so that parallel schedules stay reproducible.
  std::int64_t ordinal = -1;
  /// Search iteration the call belongs to, for per-iteration accounting.
  int iteration = 0;
};

struct ChatResponse {
  std::string content;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
};

struct UsageBucket {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::int64_t calls = 0;
};

/// Thread-safe token accounting.
class UsageLedger {
 public:
  void record(int iteration, std::int64_t prompt_tokens, std::int64_t completion_tokens);
  void record_retry();

  UsageBucket totals() const;
  std::int64_t retries() const;
  std::map<int, UsageBucket> buckets() const;

  /// (prompt + completion) / iterations; 0 when iterations is 0.
  double token_per_iter(std::int64_t iterations) const;

 private:
  mutable std::mutex mu_;
  UsageBucket totals_;
  std::int64_t retries_ = 0;
  std::map<int, UsageBucket> buckets_;
};

class LlmClient {
 public:
  virtual ~LlmClient() = default;

  /// Throws LlmUnavailable, MalformedResponse or MockScriptViolation.
  virtual ChatResponse complete(const ChatRequest& req) = 0;

  /// Reserves `n` consecutive call ordinals and returns the first.
  std::int64_t reserve_ordinals(std::int64_t n) { return next_ordinal_.fetch_add(n); }

  UsageLedger& ledger() noexcept { return ledger_; }
  const UsageLedger& ledger() const noexcept { return ledger_; }

 protected:
  std::atomic<std::int64_t> next_ordinal_{0};
  UsageLedger ledger_;
};

struct ScriptStep {
  std::string hint;  // must occur in the prompt; empty matches anything
  std::string response;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
};

/// Replays a fixed list of responses. A request with an ordinal gets the step
/// at that position; one without takes the next unused position.
class ScriptedMock final : public LlmClient {
 public:
  explicit ScriptedMock(std::vector<ScriptStep> steps);

  /// JSON array of {hint, response, prompt_tokens, completion_tokens}. Throws IoError.
  static std::unique_ptr<ScriptedMock> load(const std::filesystem::path& file);

  ChatResponse complete(const ChatRequest& req) override;

  std::size_t size() const noexcept { return steps_.size(); }

 private:
  std::vector<ScriptStep> steps_;
};

struct HttpClientOptions {
  std::string url;  // full endpoint, e.g. https://host/v1/chat/completions
  std::string api_key;
  std::string model;
  int max_retries = 3;
  int backoff_base_ms = 500;  // doubles per retry: 0.5s, 1s, 2s
  int timeout_s = 120;
  int max_in_flight = 4;
};

/// OpenAI-style chat-completions client.
class HttpChatClient final : public LlmClient {
 public:
  explicit HttpChatClient(HttpClientOptions opts);

  /// Reads LLM_API_URL, LLM_API_KEY and LLM_MODEL. Throws LlmUnavailable when
  /// LLM_API_URL is unset.
  static std::unique_ptr<HttpChatClient> from_env();

  ChatResponse complete(const ChatRequest& req) override;

  const HttpClientOptions& options() const noexcept { return opts_; }

 private:
  HttpClientOptions opts_;
  std::string scheme_host_port_;
  std::string path_;
  std::counting_semaphore<64> in_flight_;
};

}  // namespace dio
