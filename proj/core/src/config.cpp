#include "dio/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "dio/error.hpp"
#include "dio/harness.hpp"

namespace dio {

namespace {

bool contains(const std::vector<std::string>& xs, std::string_view x) {
  return std::find(xs.begin(), xs.end(), x) != xs.end();
}

}  // namespace

void RunConfig::validate() const {
  engine.validate();
  if (mode != "autonomous") {
    try {
      mode_from_string(mode);
    } catch (const ConfigError&) {
      tts_from_string(mode);
    }
  }
  try {
    for (const auto& f : families) family_from_string(f);
    for (const auto& l : levels) level_from_string(l);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (tts_samples < 1) throw ConfigError("tts_samples must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
}

nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["mode"] = c.mode;
  j["task_ids"] = c.task_ids;
  j["families"] = c.families;
  j["levels"] = c.levels;
  j["tasks_dir"] = c.tasks_dir;
  j["mock"] = c.mock;
  j["fake_exec"] = c.fake_exec;
  j["runner"] = c.runner;
  j["out_dir"] = c.out_dir;
  j["tts_samples"] = c.tts_samples;
  j["workers"] = c.workers;
  const auto engine = to_json(c.engine);
  for (const auto& [k, v] : engine.items()) j[k] = v;
  return j;
}

RunConfig run_config_from_json(const nlohmann::json& j, RunConfig c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  nlohmann::json engine_keys = nlohmann::json::object();
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "mode") c.mode = v.get<std::string>();
      else if (key == "task_ids") c.task_ids = v.get<std::vector<std::string>>();
      else if (key == "families") c.families = v.get<std::vector<std::string>>();
      else if (key == "levels") c.levels = v.get<std::vector<std::string>>();
      else if (key == "tasks_dir") c.tasks_dir = v.get<std::string>();
      else if (key == "mock") c.mock = v.get<std::string>();
      else if (key == "fake_exec") c.fake_exec = v.get<std::string>();
      else if (key == "runner") c.runner = v.get<std::string>();
      else if (key == "out_dir") c.out_dir = v.get<std::string>();
      else if (key == "tts_samples") c.tts_samples = v.get<int>();
      else if (key == "workers") c.workers = v.get<int>();
      else engine_keys[key] = v;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("bad value for '" + key + "': " + e.what());
    }
  }
  c.engine = engine_config_from_json(engine_keys, c.engine);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cli", "cannot open config " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
  auto c = run_config_from_json(j);
  const auto base = file.parent_path();
  for (auto* p : {&c.mock, &c.fake_exec, &c.tasks_dir}) {
    if (!p->empty() && std::filesystem::path(*p).is_relative()) *p = (base / *p).lexically_normal().string();
  }
  return c;
}

std::vector<Task> select_tasks(const std::vector<Task>& all, const RunConfig& c) {
  std::vector<Task> out;
  for (const auto& t : all) {
    if (!c.task_ids.empty() && !contains(c.task_ids, t.id)) continue;
    if (!c.families.empty() && !contains(c.families, to_string(t.family))) continue;
    if (!c.levels.empty() && !contains(c.levels, to_string(t.level))) continue;
    out.push_back(t);
  }
  return out;
}

}  // namespace dio
