#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dio/config.hpp"

namespace dio::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;  // bad input, IO failure, malformed run dirs
inline constexpr int kExitInfra = 2;  // executor or LLM backend failure

/// Flag values; unset flags leave the config file's value in place.
struct Overrides {
  std::optional<std::string> config;
  std::optional<std::string> mode;
  std::optional<std::string> mock;
  std::optional<std::string> out;
  std::optional<std::string> tasks;  // comma separated ids
  std::optional<std::uint64_t> seed;
  std::optional<int> islands;
  std::optional<int> iters;
  std::optional<int> stages;
  std::optional<std::string> fake_exec;
  std::optional<std::string> runner;
  std::optional<int> samples;
  std::optional<int> workers;
};

/// Config file first, then flags. Throws ConfigError or IoError.
RunConfig resolve_config(const Overrides& o);

int cmd_gen(const std::filesystem::path& out_dir, std::ostream& out, std::ostream& err);
int cmd_run(const Overrides& o, std::ostream& out, std::ostream& err);
int cmd_autonomous(const Overrides& o, std::ostream& out, std::ostream& err);
int cmd_report(const std::vector<std::filesystem::path>& dirs, const std::optional<std::string>& out_dir,
               std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to a subcommand.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dio::cli
