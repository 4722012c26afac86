#include "dio/task_catalog.hpp"

#include <array>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "dio/error.hpp"
#include "dio/hashing.hpp"

namespace dio {

namespace {

template <typename E, std::size_t N>
E enum_from(const std::array<std::pair<E, std::string_view>, N>& table, std::string_view s, const char* what) {
  for (const auto& [e, name] : table) {
    if (name == s) return e;
  }
  throw std::invalid_argument(std::string("unknown ") + what + ": " + std::string(s));
}

constexpr std::array<std::pair<Shape, std::string_view>, 9> kShapes{{
    {Shape::IntSeq, "IntSeq"},
    {Shape::BitSeq, "BitSeq"},
    {Shape::IntPairSeq, "IntPairSeq"},
    {Shape::BitPairSeq, "BitPairSeq"},
    {Shape::FloatSeq, "FloatSeq"},
    {Shape::ScalarInt, "ScalarInt"},
    {Shape::Text, "Text"},
    {Shape::PointSeq, "PointSeq"},
    {Shape::StrPair, "StrPair"},
}};

constexpr std::array<std::pair<Family, std::string_view>, 7> kFamilies{{
    {Family::Arithmetic, "Arithmetic"},
    {Family::Core, "Core"},
    {Family::Sequence, "Sequence"},
    {Family::BitParity, "BitParity"},
    {Family::Newton, "Newton"},
    {Family::Geometry, "Geometry"},
    {Family::Extra, "Extra"},
}};

constexpr std::array<std::pair<Level, std::string_view>, 3> kLevels{{
    {Level::Base, "Base"},
    {Level::Algorithm, "Algorithm"},
    {Level::Geometry, "Geometry"},
}};

template <typename E, std::size_t N>
std::string_view enum_name(const std::array<std::pair<E, std::string_view>, N>& table, E e) {
  for (const auto& [k, name] : table) {
    if (k == e) return name;
  }
  return "?";
}

Value ints(std::initializer_list<std::int64_t> xs) { return Value::int_list(xs); }
Value pair(Value a, Value b) { return Value::tuple({std::move(a), std::move(b)}); }
Value pt(std::int64_t x, std::int64_t y) { return pair(Value::integer(x), Value::integer(y)); }
Value s(const char* x) { return Value::str(x); }

std::vector<TaskDef> make_task_defs() {
  std::vector<TaskDef> defs;
  auto add = [&defs](const char* id, Family f, Level l, std::vector<Value> edges = {}) {
    TaskDef d;
    d.id = id;
    d.family = f;
    d.level = l;
    d.oracle_id = id;
    d.domain = find_oracle(id).domain;
    d.edge_cases = std::move(edges);
    defs.push_back(std::move(d));
  };
  auto I = [](std::int64_t x) { return Value::integer(x); };

  // The eight canonical factorization inputs double as the visible set.
  add("prime_factorization", Family::Arithmetic, Level::Base,
      {I(1), I(2), I(3), I(4), I(6), I(8), I(12), I(30)});
  add("digit_sum", Family::Arithmetic, Level::Base, {I(0), I(9), I(10)});
  add("gcd_pair", Family::Arithmetic, Level::Base, {ints({6, 6}), ints({1, 1}), ints({12, 18})});
  add("collatz_steps", Family::Arithmetic, Level::Base, {I(1), I(2), I(27)});
  add("float_mean", Family::Arithmetic, Level::Base,
      {Value::list({Value::real(1.0), Value::real(2.0), Value::real(3.0)})});

  add("base_k_addition", Family::Core, Level::Base,
      {pair(ints({0, 0, 0}), ints({0, 0, 0})), pair(ints({4, 4, 4}), ints({1, 0, 0}))});
  add("reverse_list", Family::Core, Level::Base, {ints({1, 2, 3})});
  add("sort_list", Family::Core, Level::Base, {ints({3, 2, 1}), ints({1, 1, 1})});
  add("filter_even", Family::Core, Level::Base, {ints({1, 3, 5}), ints({2, 4, 6})});
  add("count_occurrences", Family::Core, Level::Base, {ints({0, 0, 0})});

  add("running_sum", Family::Sequence, Level::Base, {ints({1, 2, 3})});
  add("running_max", Family::Sequence, Level::Base, {ints({3, 2, 1})});
  add("pairwise_diff", Family::Sequence, Level::Base, {ints({1, 2, 3})});
  add("delayed_echo", Family::Sequence, Level::Base, {ints({1, 2, 3})});

  add("parity_fold", Family::BitParity, Level::Base, {ints({0, 0, 0}), ints({1, 1, 1})});
  add("xor_fold", Family::BitParity, Level::Base, {ints({1, 1, 1})});
  add("binary_dot_product", Family::BitParity, Level::Base, {pair(ints({1, 1, 1}), ints({1, 1, 1}))});
  add("majority_bit", Family::BitParity, Level::Base, {ints({1, 1, 0, 0}), ints({1, 1, 0})});

  add("integer_sqrt", Family::Newton, Level::Algorithm, {I(0), I(1), I(2), I(99), I(100)});

  add("lis_length", Family::Extra, Level::Algorithm, {ints({3, 2, 1}), ints({1, 2, 3})});
  add("edit_distance", Family::Extra, Level::Algorithm,
      {pair(s("abc"), s("abc")), pair(s(""), s("ab")), pair(s("ab"), s("ba"))});
  add("rpn_eval", Family::Extra, Level::Algorithm, {s("3 4 +"), s("2 3 4 * +")});
  add("two_sum_exists", Family::Extra, Level::Algorithm, {ints({5, 5, 1}), ints({5, 1, 2})});

  add("triangle_area_3pts", Family::Geometry, Level::Geometry,
      {Value::list({pt(0, 0), pt(1, 1), pt(2, 2)}), Value::list({pt(0, 0), pt(4, 0), pt(0, 3)})});
  add("max_triangle_area", Family::Geometry, Level::Geometry,
      {Value::list({pt(0, 0), pt(1, 0), pt(0, 1), pt(1, 1)})});
  add("manhattan_path_length", Family::Geometry, Level::Geometry, {Value::list({pt(0, 0), pt(0, 0)})});
  return defs;
}

struct InputSet {
  std::unordered_set<std::string> keys;
  bool contains(const Value& v) const { return keys.count(serialize(v)) > 0; }
  bool insert(const Value& v) { return keys.insert(serialize(v)).second; }
};

// Up to `count` distinct examples: edge cases first, then seeded samples.
std::vector<Example> draw_pool(const TaskDef& def, std::uint64_t seed, std::size_t count, InputSet& seen,
                               bool with_edges) {
  auto oracle = find_oracle(def.oracle_id);
  oracle.domain = def.domain;
  std::vector<Example> out;
  if (with_edges) {
    for (const auto& e : def.edge_cases) {
      if (out.size() >= count) break;
      if (seen.insert(e)) out.push_back({e, oracle_eval(def.oracle_id, e)});
    }
  }
  Rng rng(seed);
  const std::size_t max_attempts = 64 * count + 256;
  for (std::size_t attempt = 0; out.size() < count && attempt < max_attempts; ++attempt) {
    auto x = sample_input(oracle, rng);
    if (seen.insert(x)) out.push_back({x, oracle.fn(x)});
  }
  return out;
}

constexpr std::uint64_t kMaxBackupSeeds = 64;

}  // namespace

std::string_view to_string(Shape s) noexcept { return enum_name(kShapes, s); }
std::string_view to_string(Family f) noexcept { return enum_name(kFamilies, f); }
std::string_view to_string(Level l) noexcept { return enum_name(kLevels, l); }
Shape shape_from_string(std::string_view s) { return enum_from(kShapes, s, "shape"); }
Family family_from_string(std::string_view s) { return enum_from(kFamilies, s, "family"); }
Level level_from_string(std::string_view s) { return enum_from(kLevels, s, "level"); }

nlohmann::ordered_json to_json(const InputDomain& d) {
  nlohmann::ordered_json j;
  j["shape"] = to_string(d.shape);
  j["length_range"] = {d.min_len, d.max_len};
  j["value_range"] = {d.lo, d.hi};
  j["charset"] = d.charset;
  return j;
}

InputDomain domain_from_json(const nlohmann::json& j) {
  InputDomain d;
  d.shape = shape_from_string(j.at("shape").get<std::string>());
  d.min_len = j.at("length_range").at(0).get<std::int64_t>();
  d.max_len = j.at("length_range").at(1).get<std::int64_t>();
  d.lo = j.at("value_range").at(0).get<double>();
  d.hi = j.at("value_range").at(1).get<double>();
  d.charset = j.value("charset", std::string{});
  return d;
}

bool tasks_equal(const Task& a, const Task& b) {
  auto same_examples = [](const std::vector<Example>& x, const std::vector<Example>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!(x[i].input == y[i].input) || !(x[i].output == y[i].output)) return false;
    }
    return true;
  };
  return a.id == b.id && a.family == b.family && a.level == b.level && a.oracle_id == b.oracle_id &&
         a.function_name == b.function_name && a.domain == b.domain && same_examples(a.visible, b.visible) &&
         same_examples(a.hidden, b.hidden);
}

const std::vector<TaskDef>& task_registry() {
  static const std::vector<TaskDef> defs = make_task_defs();
  return defs;
}

const TaskDef& find_task_def(std::string_view id) {
  for (const auto& d : task_registry()) {
    if (d.id == id) return d;
  }
  throw UnknownOracle(std::string(id));
}

std::vector<Example> generate_examples(const TaskDef& def, std::uint64_t seed, std::size_t count) {
  if (count < def.edge_cases.size()) {
    throw std::invalid_argument("generate_examples: count is smaller than the edge-case set of " + def.id);
  }
  InputSet seen;
  auto out = draw_pool(def, seed, count, seen, true);
  if (out.size() < count) {
    throw DomainTooSmall(def.id + ": only " + std::to_string(out.size()) + " distinct inputs for " +
                         std::to_string(count) + " requested");
  }
  return out;
}

Task build_split(const TaskDef& def) {
  Task t;
  t.id = def.id;
  t.family = def.family;
  t.level = def.level;
  t.oracle_id = def.oracle_id;
  t.function_name = def.function_name;
  t.domain = def.domain;

  // Training pool: oversampled, deduplicated, topped up from seeds 43, 44, ...
  InputSet train_seen;
  auto train = draw_pool(def, kTrainSeed, kPoolFactor * def.n_visible, train_seen, true);
  for (std::uint64_t k = 1; train.size() < def.n_visible && k <= kMaxBackupSeeds; ++k) {
    auto more = draw_pool(def, kTrainSeed + k, def.n_visible - train.size(), train_seen, false);
    train.insert(train.end(), more.begin(), more.end());
  }
  if (train.size() < def.n_visible) throw DomainTooSmall(def.id + ": cannot fill the visible set");
  t.visible.assign(train.begin(), train.begin() + static_cast<std::ptrdiff_t>(def.n_visible));

  // Test pool: every input already in the training pool is excluded up front.
  InputSet test_seen = train_seen;
  auto test = draw_pool(def, kTestSeed, kPoolFactor * def.n_hidden, test_seen, true);
  for (std::uint64_t k = 1; test.size() < def.n_hidden && k <= kMaxBackupSeeds; ++k) {
    auto more = draw_pool(def, kTestSeed + k, def.n_hidden - test.size(), test_seen, false);
    test.insert(test.end(), more.begin(), more.end());
  }
  if (test.size() < def.n_hidden) {
    if (!def.small_domain) {
      throw DomainTooSmall(def.id + ": cannot build a hidden set disjoint from training inputs");
    }
    // Small domains give up disjointness but keep hidden inputs distinct.
    InputSet hidden_seen;
    for (const auto& e : test) hidden_seen.insert(e.input);
    for (const auto& e : train) {
      if (test.size() >= def.n_hidden) break;
      if (hidden_seen.insert(e.input)) test.push_back(e);
    }
    if (test.size() < def.n_hidden) throw DomainTooSmall(def.id + ": cannot fill the hidden set");
  }
  t.hidden.assign(test.begin(), test.begin() + static_cast<std::ptrdiff_t>(def.n_hidden));
  return t;
}

std::vector<Task> build_catalog() {
  std::vector<Task> out;
  for (const auto& d : task_registry()) out.push_back(build_split(d));
  return out;
}

nlohmann::ordered_json task_to_json(const Task& t) {
  auto examples = [](const std::vector<Example>& xs) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& e : xs) {
      nlohmann::ordered_json o;
      o["input"] = to_tagged_json(e.input);
      o["output"] = to_tagged_json(e.output);
      arr.push_back(std::move(o));
    }
    return arr;
  };
  nlohmann::ordered_json j;
  j["id"] = t.id;
  j["family"] = to_string(t.family);
  j["level"] = to_string(t.level);
  j["oracle_id"] = t.oracle_id;
  j["function_name"] = t.function_name;
  j["domain"] = to_json(t.domain);
  j["visible"] = examples(t.visible);
  j["hidden"] = examples(t.hidden);
  return j;
}

Task task_from_json(const nlohmann::json& j) {
  auto examples = [](const nlohmann::json& arr) {
    std::vector<Example> out;
    for (const auto& o : arr) out.push_back({from_tagged_json(o.at("input")), from_tagged_json(o.at("output"))});
    return out;
  };
  Task t;
  t.id = j.at("id").get<std::string>();
  t.family = family_from_string(j.at("family").get<std::string>());
  t.level = level_from_string(j.at("level").get<std::string>());
  t.oracle_id = j.at("oracle_id").get<std::string>();
  t.function_name = j.at("function_name").get<std::string>();
  t.domain = domain_from_json(j.at("domain"));
  t.visible = examples(j.at("visible"));
  t.hidden = examples(j.at("hidden"));
  return t;
}

std::string task_file_content(const Task& t) { return task_to_json(t).dump(2) + "\n"; }

Task load_task(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("task_catalog", "cannot open " + file.string());
  try {
    return task_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("task_catalog", file.string() + ": " + e.what());
  }
}

Manifest render_manifest(const std::vector<Task>& catalog) {
  Manifest m;
  m.generator_version = std::string(kGeneratorVersion);
  nlohmann::ordered_json j;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& t : catalog) {
    ManifestEntry e{t.id, t.family, t.level, sha256_hex(task_file_content(t))};
    nlohmann::ordered_json o;
    o["id"] = e.id;
    o["family"] = to_string(e.family);
    o["level"] = to_string(e.level);
    o["sha256"] = e.sha256;
    arr.push_back(std::move(o));
    m.tasks.push_back(std::move(e));
  }
  j["tasks"] = std::move(arr);
  j["generator_version"] = m.generator_version;
  m.content = j.dump(2) + "\n";
  m.sha256 = sha256_hex(m.content);
  return m;
}

namespace {

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("task_catalog", "cannot write " + p.string());
  out << content;
  out.flush();
  if (!out) throw IoError("task_catalog", "short write to " + p.string());
}

}  // namespace

Manifest export_benchmark(const std::vector<Task>& catalog, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("task_catalog", "cannot create " + dir.string() + ": " + ec.message());
  for (const auto& t : catalog) write_file(dir / (t.id + ".json"), task_file_content(t));
  auto m = render_manifest(catalog);
  write_file(dir / "manifest.json", m.content);
  return m;
}

std::vector<Task> load_benchmark(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw IoError("task_catalog", "no manifest.json in " + dir.string());
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.contains("tasks")) throw IoError("task_catalog", "malformed manifest in " + dir.string());
  std::vector<Task> out;
  for (const auto& e : j["tasks"]) out.push_back(load_task(dir / (e.at("id").get<std::string>() + ".json")));
  return out;
}

}  // namespace dio
