#include "dio/value.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <stdexcept>

namespace dio {

std::string_view kind_name(Kind k) noexcept {
  switch (k) {
    case Kind::Int: return "Int";
    case Kind::Float: return "Float";
    case Kind::Bool: return "Bool";
    case Kind::Str: return "Str";
    case Kind::List: return "List";
    case Kind::Tuple: return "Tuple";
    case Kind::Null: return "Null";
  }
  return "?";
}

Value::Value() noexcept : kind_(Kind::Null), payload_(std::monostate{}) {}

Value Value::integer(std::int64_t v) { return Value(Kind::Int, v); }

Value Value::real(double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("non-finite float is not a valid Value");
  return Value(Kind::Float, v);
}

Value Value::boolean(bool v) { return Value(Kind::Bool, v); }

Value Value::str(std::string v) { return Value(Kind::Str, std::make_shared<const std::string>(std::move(v))); }

Value Value::list(Children items) { return Value(Kind::List, std::make_shared<const Children>(std::move(items))); }

Value Value::tuple(Children items) { return Value(Kind::Tuple, std::make_shared<const Children>(std::move(items))); }

Value Value::int_list(std::span<const std::int64_t> items) {
  Children out;
  out.reserve(items.size());
  for (auto x : items) out.push_back(integer(x));
  return list(std::move(out));
}

Value Value::int_list(std::initializer_list<std::int64_t> items) {
  return int_list(std::span<const std::int64_t>(items.begin(), items.size()));
}

std::int64_t Value::as_int() const {
  if (kind_ != Kind::Int) throw std::logic_error("Value is not Int");
  return std::get<std::int64_t>(payload_);
}

double Value::as_float() const {
  if (kind_ != Kind::Float) throw std::logic_error("Value is not Float");
  return std::get<double>(payload_);
}

bool Value::as_bool() const {
  if (kind_ != Kind::Bool) throw std::logic_error("Value is not Bool");
  return std::get<bool>(payload_);
}

const std::string& Value::as_str() const {
  if (kind_ != Kind::Str) throw std::logic_error("Value is not Str");
  return *std::get<std::shared_ptr<const std::string>>(payload_);
}

std::span<const Value> Value::items() const {
  if (!is_container()) return {};
  const auto& c = *std::get<std::shared_ptr<const Children>>(payload_);
  return {c.data(), c.size()};
}

bool operator==(const Value& a, const Value& b) { return values_equal(a, b, 0.0); }

bool values_equal(const Value& a, const Value& b, double float_tol) noexcept {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Kind::Null: return true;
    case Kind::Int: return a.as_int() == b.as_int();
    case Kind::Bool: return a.as_bool() == b.as_bool();
    case Kind::Str: return a.as_str() == b.as_str();
    case Kind::Float: return std::fabs(a.as_float() - b.as_float()) <= float_tol;
    case Kind::List:
    case Kind::Tuple: {
      auto xs = a.items();
      auto ys = b.items();
      if (xs.size() != ys.size()) return false;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!values_equal(xs[i], ys[i], float_tol)) return false;
      }
      return true;
    }
  }
  return false;
}

namespace {

std::string shortest_float(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Matches the guest language's repr(): shortest round-trip digits, fixed
// notation when the decimal exponent lies in [-4, 16), scientific otherwise.
std::string guest_float_repr(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific);
  std::string sci(buf, res.ptr);
  bool negative = false;
  std::size_t pos = 0;
  if (sci[0] == '-') {
    negative = true;
    pos = 1;
  }
  auto epos = sci.find('e');
  std::string digits;
  for (std::size_t i = pos; i < epos; ++i) {
    if (sci[i] != '.') digits.push_back(sci[i]);
  }
  int exp = std::atoi(sci.c_str() + epos + 1);
  while (digits.size() > 1 && digits.back() == '0') digits.pop_back();

  std::string out = negative ? "-" : "";
  if (exp >= -4 && exp < 16) {
    if (exp < 0) {
      out += "0.";
      out.append(static_cast<std::size_t>(-exp - 1), '0');
      out += digits;
    } else {
      auto int_len = static_cast<std::size_t>(exp) + 1;
      if (digits.size() <= int_len) {
        out += digits;
        out.append(int_len - digits.size(), '0');
        out += ".0";
      } else {
        out += digits.substr(0, int_len);
        out += '.';
        out += digits.substr(int_len);
      }
    }
  } else {
    out += digits.substr(0, 1);
    if (digits.size() > 1) {
      out += '.';
      out += digits.substr(1);
    }
    out += 'e';
    out += exp < 0 ? '-' : '+';
    auto mag = std::to_string(exp < 0 ? -exp : exp);
    if (mag.size() < 2) mag.insert(0, "0");
    out += mag;
  }
  return out;
}

std::string guest_str_repr(const std::string& s) {
  bool has_single = s.find('\'') != std::string::npos;
  bool has_double = s.find('"') != std::string::npos;
  char quote = (has_single && !has_double) ? '"' : '\'';
  std::string out(1, quote);
  for (unsigned char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c == static_cast<unsigned char>(quote)) {
          out += '\\';
          out += static_cast<char>(c);
        } else if (c < 0x20 || c == 0x7f) {
          static const char* hex = "0123456789abcdef";
          out += "\\x";
          out += hex[c >> 4];
          out += hex[c & 0xf];
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  out += quote;
  return out;
}

void serialize_into(const Value& v, std::string& out) {
  switch (v.kind()) {
    case Kind::Null: out += R"({"k":"n"})"; return;
    case Kind::Int:
      out += R"({"k":"i","v":)";
      out += std::to_string(v.as_int());
      out += '}';
      return;
    case Kind::Float:
      out += R"({"k":"f","v":)";
      out += shortest_float(v.as_float());
      out += '}';
      return;
    case Kind::Bool:
      out += R"({"k":"b","v":)";
      out += v.as_bool() ? "true" : "false";
      out += '}';
      return;
    case Kind::Str:
      out += R"({"k":"s","v":)";
      out += nlohmann::json(v.as_str()).dump();
      out += '}';
      return;
    case Kind::List:
    case Kind::Tuple: {
      out += v.kind() == Kind::List ? R"({"k":"l","v":[)" : R"({"k":"t","v":[)";
      bool first = true;
      for (const auto& c : v.items()) {
        if (!first) out += ',';
        first = false;
        serialize_into(c, out);
      }
      out += "]}";
      return;
    }
  }
}

}  // namespace

nlohmann::json to_tagged_json(const Value& v) {
  using nlohmann::json;
  switch (v.kind()) {
    case Kind::Null: return json{{"k", "n"}};
    case Kind::Int: return json{{"k", "i"}, {"v", v.as_int()}};
    case Kind::Float: return json{{"k", "f"}, {"v", v.as_float()}};
    case Kind::Bool: return json{{"k", "b"}, {"v", v.as_bool()}};
    case Kind::Str: return json{{"k", "s"}, {"v", v.as_str()}};
    case Kind::List:
    case Kind::Tuple: {
      json arr = json::array();
      for (const auto& c : v.items()) arr.push_back(to_tagged_json(c));
      return json{{"k", v.kind() == Kind::List ? "l" : "t"}, {"v", std::move(arr)}};
    }
  }
  return json{{"k", "n"}};
}

Value from_tagged_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("k") || !j["k"].is_string()) {
    throw std::invalid_argument("tagged value must be an object with a string \"k\"");
  }
  const auto k = j["k"].get<std::string>();
  if (k == "n") return Value::null();
  if (!j.contains("v")) throw std::invalid_argument("tagged value \"" + k + "\" lacks \"v\"");
  const auto& p = j["v"];
  if (k == "i") {
    if (!p.is_number_integer()) throw std::invalid_argument("\"i\" payload must be an integer");
    return Value::integer(p.get<std::int64_t>());
  }
  if (k == "f") {
    if (!p.is_number()) throw std::invalid_argument("\"f\" payload must be a number");
    return Value::real(p.get<double>());
  }
  if (k == "b") {
    if (!p.is_boolean()) throw std::invalid_argument("\"b\" payload must be a boolean");
    return Value::boolean(p.get<bool>());
  }
  if (k == "s") {
    if (!p.is_string()) throw std::invalid_argument("\"s\" payload must be a string");
    return Value::str(p.get<std::string>());
  }
  if (k == "l" || k == "t") {
    if (!p.is_array()) throw std::invalid_argument("container payload must be an array");
    Value::Children items;
    items.reserve(p.size());
    for (const auto& c : p) items.push_back(from_tagged_json(c));
    return k == "l" ? Value::list(std::move(items)) : Value::tuple(std::move(items));
  }
  throw std::invalid_argument("unknown kind tag \"" + k + "\"");
}

std::string serialize(const Value& v) {
  std::string out;
  serialize_into(v, out);
  return out;
}

Value deserialize(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("tagged value is not JSON: ") + e.what());
  }
  return from_tagged_json(j);
}

std::string literal_form(const Value& v) {
  switch (v.kind()) {
    case Kind::Null: return "None";
    case Kind::Int: return std::to_string(v.as_int());
    case Kind::Float: return guest_float_repr(v.as_float());
    case Kind::Bool: return v.as_bool() ? "True" : "False";
    case Kind::Str: return guest_str_repr(v.as_str());
    case Kind::List:
    case Kind::Tuple: {
      const bool is_list = v.kind() == Kind::List;
      std::string out = is_list ? "[" : "(";
      auto xs = v.items();
      for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ", ";
        out += literal_form(xs[i]);
      }
      if (!is_list && xs.size() == 1) out += ',';
      out += is_list ? "]" : ")";
      return out;
    }
  }
  return "None";
}

namespace {

class LiteralParser {
 public:
  explicit LiteralParser(std::string_view s) : s_(s) {}

  Value parse_all() {
    Value v = parse_value();
    skip_ws();
    if (pos_ != s_.size()) fail("trailing characters");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw std::invalid_argument("literal parse error at offset " + std::to_string(pos_) + ": " + why);
  }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' || s_[pos_] == '\r')) ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  bool consume_word(std::string_view w) {
    skip_ws();
    if (s_.substr(pos_, w.size()) != w) return false;
    auto end = pos_ + w.size();
    if (end < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '_')) return false;
    pos_ = end;
    return true;
  }

  Value parse_value() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end");
    char c = s_[pos_];
    if (c == '[') return parse_seq(']', Kind::List);
    if (c == '(') return parse_seq(')', Kind::Tuple);
    if (c == '\'' || c == '"') return parse_string();
    if (consume_word("True")) return Value::boolean(true);
    if (consume_word("False")) return Value::boolean(false);
    if (consume_word("None")) return Value::null();
    if (c == '-' || c == '+' || c == '.' || std::isdigit(static_cast<unsigned char>(c))) return parse_number();
    fail(std::string("unexpected character '") + c + "'");
  }

  Value parse_seq(char close, Kind kind) {
    ++pos_;  // opening bracket
    Value::Children items;
    bool trailing_comma = false;
    if (consume(close)) {
      return kind == Kind::List ? Value::list({}) : Value::tuple({});
    }
    while (true) {
      items.push_back(parse_value());
      trailing_comma = false;
      if (consume(',')) {
        trailing_comma = true;
        if (consume(close)) break;
        continue;
      }
      if (consume(close)) break;
      fail("expected ',' or closing bracket");
    }
    if (kind == Kind::Tuple && items.size() == 1 && !trailing_comma) return items.front();  // parenthesized
    return kind == Kind::List ? Value::list(std::move(items)) : Value::tuple(std::move(items));
  }

  Value parse_string() {
    char quote = s_[pos_++];
    std::string out;
    while (true) {
      if (pos_ >= s_.size()) fail("unterminated string");
      char c = s_[pos_++];
      if (c == quote) break;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (pos_ >= s_.size()) fail("dangling escape");
      char e = s_[pos_++];
      switch (e) {
        case 'n': out.push_back('\n'); break;
        case 'r': out.push_back('\r'); break;
        case 't': out.push_back('\t'); break;
        case '\\': out.push_back('\\'); break;
        case '\'': out.push_back('\''); break;
        case '"': out.push_back('"'); break;
        case 'x': {
          if (pos_ + 2 > s_.size()) fail("short \\x escape");
          unsigned v = 0;
          auto r = std::from_chars(s_.data() + pos_, s_.data() + pos_ + 2, v, 16);
          if (r.ptr != s_.data() + pos_ + 2) fail("bad \\x escape");
          out.push_back(static_cast<char>(v));
          pos_ += 2;
          break;
        }
        default: fail(std::string("unsupported escape \\") + e);
      }
    }
    return Value::str(std::move(out));
  }

  Value parse_number() {
    auto start = pos_;
    if (s_[pos_] == '-' || s_[pos_] == '+') ++pos_;
    bool is_float = false;
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '.' ) {
        is_float = true;
        ++pos_;
      } else if (c == 'e' || c == 'E') {
        is_float = true;
        ++pos_;
        if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) ++pos_;
      } else {
        break;
      }
    }
    std::string tok(s_.substr(start, pos_ - start));
    if (!tok.empty() && tok[0] == '+') tok.erase(0, 1);
    if (is_float) {
      double d = 0;
      auto r = std::from_chars(tok.data(), tok.data() + tok.size(), d);
      if (r.ec != std::errc() || r.ptr != tok.data() + tok.size()) fail("bad float '" + tok + "'");
      if (!std::isfinite(d)) fail("non-finite float");
      return Value::real(d);
    }
    std::int64_t i = 0;
    auto r = std::from_chars(tok.data(), tok.data() + tok.size(), i);
    if (r.ec != std::errc() || r.ptr != tok.data() + tok.size()) fail("bad integer '" + tok + "'");
    return Value::integer(i);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

Value parse_literal(std::string_view text) { return LiteralParser(text).parse_all(); }

SizeDepth size_and_depth(const Value& v) noexcept {
  if (!v.is_container()) return {1, 1};
  SizeDepth out{1, 0};
  std::int64_t deepest = 1;  // an empty container still has an element level
  for (const auto& c : v.items()) {
    auto sd = size_and_depth(c);
    out.node_count += sd.node_count;
    deepest = std::max(deepest, sd.depth);
  }
  out.depth = 1 + deepest;
  return out;
}

std::size_t hash_value(const Value& v) noexcept {
  std::size_t h = static_cast<std::size_t>(v.kind()) * 0x9e3779b97f4a7c15ULL;
  auto mix = [&h](std::size_t x) { h ^= x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
  switch (v.kind()) {
    case Kind::Null: break;
    case Kind::Int: mix(std::hash<std::int64_t>{}(v.as_int())); break;
    case Kind::Float: mix(std::hash<double>{}(v.as_float())); break;
    case Kind::Bool: mix(v.as_bool() ? 1 : 2); break;
    case Kind::Str: mix(std::hash<std::string>{}(v.as_str())); break;
    case Kind::List:
    case Kind::Tuple:
      mix(v.size());
      for (const auto& c : v.items()) mix(hash_value(c));
      break;
  }
  return h;
}

}  // namespace dio
