#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dio/rng.hpp"
#include "dio/value.hpp"

namespace dio {

enum class Shape { IntSeq, BitSeq, IntPairSeq, BitPairSeq, FloatSeq, ScalarInt, Text, PointSeq, StrPair };
enum class Family { Arithmetic, Core, Sequence, BitParity, Newton, Geometry, Extra };
enum class Level { Base, Algorithm, Geometry };

std::string_view to_string(Shape s) noexcept;
std::string_view to_string(Family f) noexcept;
std::string_view to_string(Level l) noexcept;
Shape shape_from_string(std::string_view s);
Family family_from_string(std::string_view s);
Level level_from_string(std::string_view s);

/// Where an oracle's inputs come from. Sequence lengths use length_range;
/// element values use value_range (FloatSeq elements are multiples of 0.01);
/// paired shapes produce a Tuple of two aligned sequences.
struct InputDomain {
  Shape shape = Shape::IntSeq;
  std::int64_t min_len = 3;
  std::int64_t max_len = 10;
  double lo = 0;
  double hi = 9;
  std::string charset;

  friend bool operator==(const InputDomain&, const InputDomain&) = default;
};

nlohmann::ordered_json to_json(const InputDomain& d);
InputDomain domain_from_json(const nlohmann::json& j);

struct Example {
  Value input;
  Value output;
};

/// Oracle plus everything needed to build its benchmark task.
struct TaskDef {
  std::string id;
  Family family = Family::Core;
  Level level = Level::Base;
  std::string oracle_id;
  std::string function_name = "f";
  InputDomain domain;
  std::vector<Value> edge_cases;
  bool small_domain = false;
  std::size_t n_visible = 8;
  std::size_t n_hidden = 15;
};

struct Task {
  std::string id;
  Family family = Family::Core;
  Level level = Level::Base;
  std::string oracle_id;
  std::string function_name = "f";
  InputDomain domain;
  std::vector<Example> visible;
  std::vector<Example> hidden;
};

bool tasks_equal(const Task& a, const Task& b);

// ---- oracle registry -------------------------------------------------------

using OracleFn = std::function<Value(const Value&)>;
using Sampler = std::function<Value(Rng&)>;
using Validator = std::function<bool(const Value&, std::string*)>;

struct OracleSpec {
  std::string id;
  InputDomain domain;
  OracleFn fn;
  Sampler sampler;      // empty: sample from the domain shape
  Validator validator;  // empty: check against the domain shape
};

const OracleSpec& find_oracle(std::string_view oracle_id);  // throws UnknownOracle
std::vector<std::string> oracle_ids();

/// True when `input` lies in the domain; `why` receives the reason otherwise.
bool conforms(const InputDomain& d, const Value& input, std::string* why = nullptr);
bool conforms(const OracleSpec& o, const Value& input, std::string* why = nullptr);

/// Ground truth. Throws UnknownOracle or DomainViolation.
Value oracle_eval(std::string_view oracle_id, const Value& input);

/// One seeded draw from the oracle's input domain.
Value sample_input(const OracleSpec& o, Rng& rng);

// ---- catalog ---------------------------------------------------------------

const std::vector<TaskDef>& task_registry();
const TaskDef& find_task_def(std::string_view id);

/// Edge cases first, then distinct seeded domain samples. Deterministic in
/// (def, seed, count). Throws DomainTooSmall when `count` distinct inputs
/// cannot be produced.
std::vector<Example> generate_examples(const TaskDef& def, std::uint64_t seed, std::size_t count);

inline constexpr std::uint64_t kTrainSeed = 42;
inline constexpr std::uint64_t kTestSeed = 999;
inline constexpr std::size_t kPoolFactor = 4;

/// Visible/hidden split with input-level disjointness and backup-seed top-up.
Task build_split(const TaskDef& def);

std::vector<Task> build_catalog();

// ---- persistence -----------------------------------------------------------

inline constexpr std::string_view kGeneratorVersion = "io2code-gen/1";

nlohmann::ordered_json task_to_json(const Task& t);
Task task_from_json(const nlohmann::json& j);
std::string task_file_content(const Task& t);
Task load_task(const std::filesystem::path& file);

struct ManifestEntry {
  std::string id;
  Family family;
  Level level;
  std::string sha256;
};

struct Manifest {
  std::vector<ManifestEntry> tasks;
  std::string generator_version;
  std::string content;  // exact bytes of manifest.json
  std::string sha256;   // hash of `content`
};

/// Writes <dir>/<id>.json per task plus <dir>/manifest.json. Throws IoError.
Manifest export_benchmark(const std::vector<Task>& catalog, const std::filesystem::path& dir);
Manifest render_manifest(const std::vector<Task>& catalog);
std::vector<Task> load_benchmark(const std::filesystem::path& dir);

}  // namespace dio
