#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "dio/error.hpp"
#include "dio/llm.hpp"

namespace dio {

namespace {

// Splits "https://host:port/path" into "https://host:port" and "/path".
std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw LlmUnavailable("endpoint url lacks a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<64>& s) : s_(s) { s_.acquire(); }
  ~SlotGuard() { s_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<64>& s_;
};

}  // namespace

HttpChatClient::HttpChatClient(HttpClientOptions opts)
    : opts_(std::move(opts)), in_flight_(std::clamp(opts_.max_in_flight, 1, 64)) {
  std::tie(scheme_host_port_, path_) = split_url(opts_.url);
}

std::unique_ptr<HttpChatClient> HttpChatClient::from_env() {
  const char* url = std::getenv("LLM_API_URL");
  if (!url || !*url) throw LlmUnavailable("LLM_API_URL is not set (use --mock for scripted runs)");
  HttpClientOptions o;
  o.url = url;
  if (const char* key = std::getenv("LLM_API_KEY")) o.api_key = key;
  if (const char* model = std::getenv("LLM_MODEL")) o.model = model;
  return std::make_unique<HttpChatClient>(std::move(o));
}

ChatResponse HttpChatClient::complete(const ChatRequest& req) {
  nlohmann::json body;
  body["model"] = req.model.empty() ? opts_.model : req.model;
  body["temperature"] = req.temperature;
  body["max_tokens"] = req.max_tokens;
  body["messages"] = nlohmann::json::array();
  for (const auto& m : req.messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  const auto payload = body.dump();

  httplib::Headers headers;
  if (!opts_.api_key.empty()) headers.emplace("Authorization", "Bearer " + opts_.api_key);

  SlotGuard slot(in_flight_);
  std::string last_error;
  for (int attempt = 0; attempt <= opts_.max_retries; ++attempt) {
    if (attempt > 0) {
      ledger_.record_retry();
      std::this_thread::sleep_for(std::chrono::milliseconds(opts_.backoff_base_ms << (attempt - 1)));
    }
    httplib::Client cli(scheme_host_port_);
    cli.set_connection_timeout(opts_.timeout_s, 0);
    cli.set_read_timeout(opts_.timeout_s, 0);
    cli.set_write_timeout(opts_.timeout_s, 0);
    auto res = cli.Post(path_, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw LlmUnavailable("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 256));
    }
    const auto j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded()) throw MalformedResponse("body is not JSON");
    ChatResponse out;
    try {
      out.content = j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      throw MalformedResponse("no choices[0].message.content");
    }
    if (out.content.empty()) throw MalformedResponse("empty content");
    if (j.contains("usage") && j["usage"].is_object()) {
      out.prompt_tokens = j["usage"].value("prompt_tokens", std::int64_t{0});
      out.completion_tokens = j["usage"].value("completion_tokens", std::int64_t{0});
    }
    ledger_.record(req.iteration, out.prompt_tokens, out.completion_tokens);
    return out;
  }
  throw LlmUnavailable(last_error + " after " + std::to_string(opts_.max_retries) + " retries");
}

}  // namespace dio
