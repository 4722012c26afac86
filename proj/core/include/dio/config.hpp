#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "dio/engine.hpp"
#include "dio/task_catalog.hpp"

namespace dio {

/// Everything one CLI invocation needs besides the LLM and executor backends.
/// The JSON form is a single flat object: run-level keys below plus any
/// EngineConfig key.
struct RunConfig {
  EngineConfig engine;
  std::string mode = "dio";
  std::vector<std::string> task_ids;  // empty: every task
  std::vector<std::string> families;
  std::vector<std::string> levels;
  std::string tasks_dir;  // empty: build the catalog in memory
  std::string mock;       // scripted LLM responses
  std::string fake_exec;  // tabulated executor
  std::string runner;     // guest runner command line
  std::string out_dir;
  int tts_samples = 40;
  int workers = 1;

  void validate() const;  // throws ConfigError
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

nlohmann::ordered_json to_json(const RunConfig& c);
RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = {});
/// Relative mock, fake_exec and tasks_dir paths resolve against the file's
/// directory. Throws IoError or ConfigError.
RunConfig load_run_config(const std::filesystem::path& file);

/// Tasks matching every non-empty filter, in catalog order.
std::vector<Task> select_tasks(const std::vector<Task>& all, const RunConfig& c);

}  // namespace dio
