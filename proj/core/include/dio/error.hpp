#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dio {

/// Base of every exception the engine throws. `component()` names the module
/// that raised it so operator-facing diagnostics can say where things broke.
class Error : public std::runtime_error {
 public:
  Error(std::string component, const std::string& what)
      : std::runtime_error(what), component_(std::move(component)) {}

  const std::string& component() const noexcept { return component_; }

 private:
  std::string component_;
};

// task_catalog
class UnknownOracle : public Error {
 public:
  explicit UnknownOracle(const std::string& id) : Error("task_catalog", "unknown oracle: " + id) {}
};

class DomainViolation : public Error {
 public:
  explicit DomainViolation(const std::string& what) : Error("task_catalog", "domain violation: " + what) {}
};

class DomainTooSmall : public Error {
 public:
  explicit DomainTooSmall(const std::string& what) : Error("task_catalog", "domain too small: " + what) {}
};

// curriculum
class InvalidStageCount : public Error {
 public:
  explicit InvalidStageCount(const std::string& what) : Error("curriculum", "invalid stage count: " + what) {}
};

// executor_gateway. Infrastructure failure: aborts the run.
class BackendUnavailable : public Error {
 public:
  explicit BackendUnavailable(const std::string& what) : Error("executor_gateway", "backend unavailable: " + what) {}
};

// mutation_prompter
class DiffApplyError : public Error {
 public:
  enum class Kind { NoMatch, AmbiguousMatch };

  DiffApplyError(Kind kind, std::size_t block_index)
      : Error("mutation_prompter", std::string(kind == Kind::NoMatch ? "NoMatch" : "AmbiguousMatch") +
                                       " in diff block " + std::to_string(block_index)),
        kind_(kind),
        block_index_(block_index) {}

  Kind kind() const noexcept { return kind_; }
  std::size_t block_index() const noexcept { return block_index_; }

 private:
  Kind kind_;
  std::size_t block_index_;
};

// llm_gateway
class LlmUnavailable : public Error {
 public:
  explicit LlmUnavailable(const std::string& what) : Error("llm_gateway", "llm unavailable: " + what) {}
};

class MalformedResponse : public Error {
 public:
  explicit MalformedResponse(const std::string& what) : Error("llm_gateway", "malformed response: " + what) {}
};

class MockScriptViolation : public Error {
 public:
  explicit MockScriptViolation(const std::string& what) : Error("llm_gateway", "mock script violation: " + what) {}
};

// evolution_engine (autonomous mode)
class InvalidProposedInput : public Error {
 public:
  explicit InvalidProposedInput(const std::string& what)
      : Error("evolution_engine", "invalid proposed input: " + what) {}
};

// experiment_harness
class InvalidSequence : public Error {
 public:
  explicit InvalidSequence(const std::string& what) : Error("experiment_harness", "invalid sequence: " + what) {}
};

// cli / config / persistence
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("cli", "config error: " + what) {}
};

class IoError : public Error {
 public:
  IoError(std::string component, const std::string& what) : Error(std::move(component), "io error: " + what) {}
};

}  // namespace dio
