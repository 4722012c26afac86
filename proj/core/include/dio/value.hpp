#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace dio {

enum class Kind { Int, Float, Bool, Str, List, Tuple, Null };

std::string_view kind_name(Kind k) noexcept;

/// Immutable tagged tree: the currency of tasks, oracles and evaluation.
///
/// Children are shared, so copying a Value is cheap and a Value may be read
/// from any number of threads. Floats are required to be finite.
class Value {
 public:
  using Children = std::vector<Value>;

  Value() noexcept;  // Null

  static Value null() { return Value(); }
  static Value integer(std::int64_t v);
  static Value real(double v);  // throws std::invalid_argument on NaN/Inf
  static Value boolean(bool v);
  static Value str(std::string v);
  static Value list(Children items);
  static Value tuple(Children items);
  static Value int_list(std::span<const std::int64_t> items);
  static Value int_list(std::initializer_list<std::int64_t> items);

  Kind kind() const noexcept { return kind_; }
  bool is_container() const noexcept { return kind_ == Kind::List || kind_ == Kind::Tuple; }

  std::int64_t as_int() const;
  double as_float() const;
  bool as_bool() const;
  const std::string& as_str() const;
  std::span<const Value> items() const;  // empty span for scalars
  std::size_t size() const noexcept { return items().size(); }
  const Value& operator[](std::size_t i) const { return items()[i]; }

  /// Structural equality with zero float tolerance.
  friend bool operator==(const Value& a, const Value& b);

 private:
  using Payload = std::variant<std::monostate, std::int64_t, double, bool, std::shared_ptr<const std::string>,
                               std::shared_ptr<const Children>>;

  Value(Kind k, Payload p) : kind_(k), payload_(std::move(p)) {}

  Kind kind_;
  Payload payload_;
};

inline constexpr double kDefaultFloatTol = 1e-6;

/// Recursive comparison: same kind required (List never equals Tuple, Int
/// never equals Float), floats within `float_tol`, containers element-wise.
bool values_equal(const Value& a, const Value& b, double float_tol = kDefaultFloatTol) noexcept;

/// Canonical tagged-JSON wire form: {"k": "i"|"f"|"b"|"s"|"l"|"t"|"n", "v": ...}.
nlohmann::json to_tagged_json(const Value& v);
Value from_tagged_json(const nlohmann::json& j);  // throws std::invalid_argument
std::string serialize(const Value& v);
Value deserialize(std::string_view text);

/// Guest-literal rendering: `[2, 2, 3]`, `(1, 2)`, `(1,)`, `'abc'`, `True`, `None`.
std::string literal_form(const Value& v);

/// Inverse of literal_form for the literal subset it emits. Used to read
/// inputs an LLM proposes. Throws std::invalid_argument on malformed text.
Value parse_literal(std::string_view text);

struct SizeDepth {
  std::int64_t node_count = 0;
  std::int64_t depth = 0;
  friend bool operator==(const SizeDepth&, const SizeDepth&) = default;
};

/// Scalars are (1, 1). A container counts itself plus its children; its depth
/// is one more than its deepest child, where an empty container still reserves
/// one element level (so `[]` has depth 2).
SizeDepth size_and_depth(const Value& v) noexcept;

/// Stable ordering key used for hashing sets of values.
std::size_t hash_value(const Value& v) noexcept;

}  // namespace dio
