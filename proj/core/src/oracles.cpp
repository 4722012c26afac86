// Deterministic ground-truth functions and their input domains.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "dio/error.hpp"
#include "dio/task_catalog.hpp"

namespace dio {

namespace {

using Ints = std::vector<std::int64_t>;

Ints ints_of(const Value& v) {
  Ints out;
  out.reserve(v.size());
  for (const auto& x : v.items()) out.push_back(x.as_int());
  return out;
}

Value list_of(const Ints& xs) { return Value::int_list(std::span<const std::int64_t>(xs)); }

struct Point {
  std::int64_t x;
  std::int64_t y;
};

std::vector<Point> points_of(const Value& v) {
  std::vector<Point> out;
  for (const auto& p : v.items()) out.push_back({p[0].as_int(), p[1].as_int()});
  return out;
}

std::int64_t twice_area(Point a, Point b, Point c) {
  auto cross = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
  return cross < 0 ? -cross : cross;
}

// ---- oracles --------------------------------------------------------------

Value prime_factorization(const Value& in) {
  auto n = in.as_int();
  Ints out;
  for (std::int64_t d = 2; d * d <= n; ++d) {
    while (n % d == 0) {
      out.push_back(d);
      n /= d;
    }
  }
  if (n > 1) out.push_back(n);
  return list_of(out);
}

Value digit_sum(const Value& in) {
  auto n = in.as_int();
  std::int64_t s = 0;
  for (; n > 0; n /= 10) s += n % 10;
  return Value::integer(s);
}

Value gcd_pair(const Value& in) { return Value::integer(std::gcd(in[0].as_int(), in[1].as_int())); }

Value collatz_steps(const Value& in) {
  auto n = in.as_int();
  std::int64_t steps = 0;
  while (n != 1) {
    n = (n % 2 == 0) ? n / 2 : 3 * n + 1;
    ++steps;
  }
  return Value::integer(steps);
}

constexpr std::int64_t kAdditionBase = 5;

// Little-endian digit streams; the result keeps the final carry digit.
Value base_k_addition(const Value& in) {
  auto a = ints_of(in[0]);
  auto b = ints_of(in[1]);
  Ints out;
  std::int64_t carry = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto s = a[i] + b[i] + carry;
    out.push_back(s % kAdditionBase);
    carry = s / kAdditionBase;
  }
  out.push_back(carry);
  return list_of(out);
}

Value running_sum(const Value& in) {
  Ints out;
  std::int64_t acc = 0;
  for (auto x : ints_of(in)) out.push_back(acc += x);
  return list_of(out);
}

Value running_max(const Value& in) {
  Ints xs = ints_of(in);
  Ints out;
  for (std::size_t i = 0; i < xs.size(); ++i) out.push_back(i == 0 ? xs[0] : std::max(out.back(), xs[i]));
  return list_of(out);
}

Value reverse_list(const Value& in) {
  auto xs = ints_of(in);
  std::reverse(xs.begin(), xs.end());
  return list_of(xs);
}

Value sort_list(const Value& in) {
  auto xs = ints_of(in);
  std::sort(xs.begin(), xs.end());
  return list_of(xs);
}

Value filter_even(const Value& in) {
  Ints out;
  for (auto x : ints_of(in)) {
    if (x % 2 == 0) out.push_back(x);
  }
  return list_of(out);
}

Value pairwise_diff(const Value& in) {
  auto xs = ints_of(in);
  Ints out;
  for (std::size_t i = 1; i < xs.size(); ++i) out.push_back(xs[i] - xs[i - 1]);
  return list_of(out);
}

Value delayed_echo(const Value& in) {
  auto xs = ints_of(in);
  Ints out{0};
  out.insert(out.end(), xs.begin(), xs.end() - 1);
  return list_of(out);
}

Value count_occurrences(const Value& in) {
  std::map<std::int64_t, std::int64_t> seen;
  Ints out;
  for (auto x : ints_of(in)) out.push_back(++seen[x]);
  return list_of(out);
}

Value parity_fold(const Value& in) {
  std::int64_t p = 0;
  for (auto x : ints_of(in)) p ^= x;
  return Value::integer(p);
}

Value xor_fold(const Value& in) {
  Ints out;
  std::int64_t p = 0;
  for (auto x : ints_of(in)) out.push_back(p ^= x);
  return list_of(out);
}

Value binary_dot_product(const Value& in) {
  auto a = ints_of(in[0]);
  auto b = ints_of(in[1]);
  std::int64_t s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return Value::integer(s);
}

Value majority_bit(const Value& in) {
  auto xs = ints_of(in);
  auto ones = std::count(xs.begin(), xs.end(), 1);
  return Value::integer(2 * ones > static_cast<std::int64_t>(xs.size()) ? 1 : 0);
}

Value float_mean(const Value& in) {
  double s = 0;
  for (const auto& x : in.items()) s += x.as_float();
  return Value::real(s / static_cast<double>(in.size()));
}

Value lis_length(const Value& in) {
  Ints tails;
  for (auto x : ints_of(in)) {
    auto it = std::lower_bound(tails.begin(), tails.end(), x);
    if (it == tails.end()) {
      tails.push_back(x);
    } else {
      *it = x;
    }
  }
  return Value::integer(static_cast<std::int64_t>(tails.size()));
}

Value edit_distance(const Value& in) {
  const auto& a = in[0].as_str();
  const auto& b = in[1].as_str();
  std::vector<std::int64_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<std::int64_t>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<std::int64_t>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      auto sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return Value::integer(prev[b.size()]);
}

std::vector<std::string> split_tokens(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string tok; is >> tok;) out.push_back(tok);
  return out;
}

bool is_operator(const std::string& t) { return t == "+" || t == "-" || t == "*"; }

Value rpn_eval(const Value& in) {
  Ints stack;
  for (const auto& tok : split_tokens(in.as_str())) {
    if (is_operator(tok)) {
      auto b = stack.back();
      stack.pop_back();
      auto a = stack.back();
      stack.pop_back();
      stack.push_back(tok == "+" ? a + b : tok == "-" ? a - b : a * b);
    } else {
      stack.push_back(std::stoll(tok));
    }
  }
  return Value::integer(stack.back());
}

constexpr std::int64_t kTwoSumTarget = 10;

Value two_sum_exists(const Value& in) {
  auto xs = ints_of(in);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      if (xs[i] + xs[j] == kTwoSumTarget) return Value::boolean(true);
    }
  }
  return Value::boolean(false);
}

Value integer_sqrt(const Value& in) {
  auto n = in.as_int();
  std::int64_t r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return Value::integer(r);
}

Value triangle_area_3pts(const Value& in) {
  auto p = points_of(in);
  return Value::real(static_cast<double>(twice_area(p[0], p[1], p[2])) / 2.0);
}

Value max_triangle_area(const Value& in) {
  auto p = points_of(in);
  std::int64_t best = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j)
      for (std::size_t k = j + 1; k < p.size(); ++k) best = std::max(best, twice_area(p[i], p[j], p[k]));
  return Value::real(static_cast<double>(best) / 2.0);
}

Value manhattan_path_length(const Value& in) {
  auto p = points_of(in);
  std::int64_t total = 0;
  for (std::size_t i = 1; i < p.size(); ++i) total += std::llabs(p[i].x - p[i - 1].x) + std::llabs(p[i].y - p[i - 1].y);
  return Value::integer(total);
}

// ---- samplers ---------------------------------------------------------------

Value sample_int_seq(Rng& rng, std::int64_t len, std::int64_t lo, std::int64_t hi) {
  Value::Children xs;
  for (std::int64_t i = 0; i < len; ++i) xs.push_back(Value::integer(rng.uniform_int(lo, hi)));
  return Value::list(std::move(xs));
}

Value sample_rpn(Rng& rng, const InputDomain& d) {
  // Build a postfix string by interleaving operands and operators so that the
  // stack never underflows and ends with exactly one value.
  auto operands = rng.uniform_int(d.min_len, d.max_len);
  static const char* ops[] = {"+", "-", "*"};
  std::string out;
  std::int64_t depth = 0;
  std::int64_t pushed = 0;
  auto emit = [&out](const std::string& t) {
    if (!out.empty()) out += ' ';
    out += t;
  };
  while (pushed < operands || depth > 1) {
    bool can_push = pushed < operands;
    bool can_reduce = depth >= 2;
    bool push = can_push && (!can_reduce || rng.uniform_int(0, 1) == 0);
    if (push) {
      emit(std::to_string(rng.uniform_int(static_cast<std::int64_t>(d.lo), static_cast<std::int64_t>(d.hi))));
      ++pushed;
      ++depth;
    } else {
      emit(ops[rng.index(3)]);
      --depth;
    }
  }
  return Value::str(out);
}

bool validate_rpn(const InputDomain& d, const Value& v, std::string* why) {
  auto fail = [why](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  if (v.kind() != Kind::Str) return fail("expected Str");
  std::int64_t depth = 0;
  std::int64_t operands = 0;
  for (const auto& tok : split_tokens(v.as_str())) {
    if (is_operator(tok)) {
      if (depth < 2) return fail("stack underflow at '" + tok + "'");
      --depth;
      continue;
    }
    std::int64_t x = 0;
    try {
      std::size_t used = 0;
      x = std::stoll(tok, &used);
      if (used != tok.size()) return fail("bad token '" + tok + "'");
    } catch (const std::exception&) {
      return fail("bad token '" + tok + "'");
    }
    if (x < static_cast<std::int64_t>(d.lo) || x > static_cast<std::int64_t>(d.hi)) return fail("operand out of range");
    ++operands;
    ++depth;
  }
  if (depth != 1) return fail("expression does not reduce to one value");
  if (operands < d.min_len || operands > d.max_len) return fail("operand count out of range");
  return true;
}

InputDomain dom(Shape s, std::int64_t min_len, std::int64_t max_len, double lo, double hi, std::string charset = {}) {
  return InputDomain{s, min_len, max_len, lo, hi, std::move(charset)};
}

std::vector<OracleSpec> make_registry() {
  std::vector<OracleSpec> r;
  auto add = [&r](std::string id, InputDomain d, OracleFn fn) { r.push_back({std::move(id), d, std::move(fn), {}, {}}); };

  add("prime_factorization", dom(Shape::ScalarInt, 1, 1, 1, 200), prime_factorization);
  add("digit_sum", dom(Shape::ScalarInt, 1, 1, 0, 9999), digit_sum);
  add("gcd_pair", dom(Shape::IntSeq, 2, 2, 1, 60), gcd_pair);
  add("collatz_steps", dom(Shape::ScalarInt, 1, 1, 1, 100), collatz_steps);
  add("float_mean", dom(Shape::FloatSeq, 3, 10, -10, 10), float_mean);

  add("base_k_addition", dom(Shape::IntPairSeq, 3, 10, 0, kAdditionBase - 1), base_k_addition);
  add("reverse_list", dom(Shape::IntSeq, 3, 10, 0, 50), reverse_list);
  add("sort_list", dom(Shape::IntSeq, 3, 10, -20, 20), sort_list);
  add("filter_even", dom(Shape::IntSeq, 3, 10, 0, 30), filter_even);
  add("count_occurrences", dom(Shape::IntSeq, 3, 10, 0, 3), count_occurrences);

  add("running_sum", dom(Shape::IntSeq, 3, 10, -9, 9), running_sum);
  add("running_max", dom(Shape::IntSeq, 3, 10, -20, 20), running_max);
  add("pairwise_diff", dom(Shape::IntSeq, 3, 10, -10, 10), pairwise_diff);
  add("delayed_echo", dom(Shape::IntSeq, 3, 10, 1, 9), delayed_echo);

  add("parity_fold", dom(Shape::BitSeq, 3, 10, 0, 1), parity_fold);
  add("xor_fold", dom(Shape::BitSeq, 3, 10, 0, 1), xor_fold);
  add("binary_dot_product", dom(Shape::BitPairSeq, 3, 10, 0, 1), binary_dot_product);
  add("majority_bit", dom(Shape::BitSeq, 3, 10, 0, 1), majority_bit);

  add("integer_sqrt", dom(Shape::ScalarInt, 1, 1, 0, 10000), integer_sqrt);

  add("lis_length", dom(Shape::IntSeq, 3, 10, 0, 20), lis_length);
  add("edit_distance", dom(Shape::StrPair, 0, 6, 0, 0, "abc"), edit_distance);
  {
    auto d = dom(Shape::Text, 2, 5, 1, 9, "0123456789+-* ");
    r.push_back({"rpn_eval", d, rpn_eval, [d](Rng& rng) { return sample_rpn(rng, d); },
                 [d](const Value& v, std::string* why) { return validate_rpn(d, v, why); }});
  }
  add("two_sum_exists", dom(Shape::IntSeq, 3, 10, 0, kTwoSumTarget), two_sum_exists);

  add("triangle_area_3pts", dom(Shape::PointSeq, 3, 3, -10, 10), triangle_area_3pts);
  add("max_triangle_area", dom(Shape::PointSeq, 4, 8, -10, 10), max_triangle_area);
  add("manhattan_path_length", dom(Shape::PointSeq, 2, 8, -10, 10), manhattan_path_length);
  return r;
}

const std::vector<OracleSpec>& registry() {
  static const std::vector<OracleSpec> r = make_registry();
  return r;
}

bool check_int_seq(const Value& v, const InputDomain& d, std::string* why, bool check_len = true) {
  auto fail = [why](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  if (v.kind() != Kind::List) return fail("expected List");
  auto n = static_cast<std::int64_t>(v.size());
  if (check_len && (n < d.min_len || n > d.max_len)) return fail("length " + std::to_string(n) + " out of range");
  for (const auto& x : v.items()) {
    if (x.kind() != Kind::Int) return fail("expected Int elements");
    if (static_cast<double>(x.as_int()) < d.lo || static_cast<double>(x.as_int()) > d.hi) {
      return fail("element " + std::to_string(x.as_int()) + " out of range");
    }
  }
  return true;
}

}  // namespace

const OracleSpec& find_oracle(std::string_view oracle_id) {
  for (const auto& o : registry()) {
    if (o.id == oracle_id) return o;
  }
  throw UnknownOracle(std::string(oracle_id));
}

std::vector<std::string> oracle_ids() {
  std::vector<std::string> out;
  for (const auto& o : registry()) out.push_back(o.id);
  return out;
}

bool conforms(const InputDomain& d, const Value& v, std::string* why) {
  auto fail = [why](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  switch (d.shape) {
    case Shape::ScalarInt:
      if (v.kind() != Kind::Int) return fail("expected Int");
      if (static_cast<double>(v.as_int()) < d.lo || static_cast<double>(v.as_int()) > d.hi) return fail("out of range");
      return true;
    case Shape::IntSeq:
    case Shape::BitSeq: return check_int_seq(v, d, why);
    case Shape::IntPairSeq:
    case Shape::BitPairSeq:
      if (v.kind() != Kind::Tuple || v.size() != 2) return fail("expected a Tuple of two sequences");
      if (!check_int_seq(v[0], d, why) || !check_int_seq(v[1], d, why)) return false;
      if (v[0].size() != v[1].size()) return fail("paired sequences differ in length");
      return true;
    case Shape::FloatSeq: {
      if (v.kind() != Kind::List) return fail("expected List");
      auto n = static_cast<std::int64_t>(v.size());
      if (n < d.min_len || n > d.max_len) return fail("length out of range");
      for (const auto& x : v.items()) {
        if (x.kind() != Kind::Float) return fail("expected Float elements");
        if (x.as_float() < d.lo || x.as_float() > d.hi) return fail("element out of range");
      }
      return true;
    }
    case Shape::Text: {
      if (v.kind() != Kind::Str) return fail("expected Str");
      auto n = static_cast<std::int64_t>(v.as_str().size());
      if (n < d.min_len || n > d.max_len) return fail("length out of range");
      for (char c : v.as_str()) {
        if (d.charset.find(c) == std::string::npos) return fail("character outside charset");
      }
      return true;
    }
    case Shape::StrPair:
      if (v.kind() != Kind::Tuple || v.size() != 2) return fail("expected a Tuple of two strings");
      for (const auto& s : v.items()) {
        if (s.kind() != Kind::Str) return fail("expected Str members");
        auto n = static_cast<std::int64_t>(s.as_str().size());
        if (n < d.min_len || n > d.max_len) return fail("length out of range");
        for (char c : s.as_str()) {
          if (d.charset.find(c) == std::string::npos) return fail("character outside charset");
        }
      }
      return true;
    case Shape::PointSeq: {
      if (v.kind() != Kind::List) return fail("expected List");
      auto n = static_cast<std::int64_t>(v.size());
      if (n < d.min_len || n > d.max_len) return fail("length out of range");
      for (const auto& p : v.items()) {
        if (p.kind() != Kind::Tuple || p.size() != 2) return fail("points must be 2-tuples");
        for (const auto& c : p.items()) {
          if (c.kind() != Kind::Int) return fail("coordinates must be Int");
          if (static_cast<double>(c.as_int()) < d.lo || static_cast<double>(c.as_int()) > d.hi) {
            return fail("coordinate out of range");
          }
        }
      }
      return true;
    }
  }
  return fail("unknown shape");
}

bool conforms(const OracleSpec& o, const Value& input, std::string* why) {
  if (o.validator) return o.validator(input, why);
  return conforms(o.domain, input, why);
}

Value oracle_eval(std::string_view oracle_id, const Value& input) {
  const auto& o = find_oracle(oracle_id);
  std::string why;
  if (!conforms(o, input, &why)) throw DomainViolation(std::string(oracle_id) + ": " + why);
  return o.fn(input);
}

Value sample_input(const OracleSpec& o, Rng& rng) {
  if (o.sampler) return o.sampler(rng);
  const auto& d = o.domain;
  const auto lo = static_cast<std::int64_t>(d.lo);
  const auto hi = static_cast<std::int64_t>(d.hi);
  switch (d.shape) {
    case Shape::ScalarInt: return Value::integer(rng.uniform_int(lo, hi));
    case Shape::IntSeq:
    case Shape::BitSeq: return sample_int_seq(rng, rng.uniform_int(d.min_len, d.max_len), lo, hi);
    case Shape::IntPairSeq:
    case Shape::BitPairSeq: {
      auto len = rng.uniform_int(d.min_len, d.max_len);
      auto a = sample_int_seq(rng, len, lo, hi);
      auto b = sample_int_seq(rng, len, lo, hi);
      return Value::tuple({a, b});
    }
    case Shape::FloatSeq: {
      auto len = rng.uniform_int(d.min_len, d.max_len);
      Value::Children xs;
      for (std::int64_t i = 0; i < len; ++i) {
        auto cents = rng.uniform_int(static_cast<std::int64_t>(std::llround(d.lo * 100)),
                                     static_cast<std::int64_t>(std::llround(d.hi * 100)));
        xs.push_back(Value::real(static_cast<double>(cents) / 100.0));
      }
      return Value::list(std::move(xs));
    }
    case Shape::Text: {
      auto len = rng.uniform_int(d.min_len, d.max_len);
      std::string s;
      for (std::int64_t i = 0; i < len; ++i) s.push_back(d.charset[rng.index(d.charset.size())]);
      return Value::str(s);
    }
    case Shape::StrPair: {
      Value::Children pair;
      for (int k = 0; k < 2; ++k) {
        auto len = rng.uniform_int(d.min_len, d.max_len);
        std::string s;
        for (std::int64_t i = 0; i < len; ++i) s.push_back(d.charset[rng.index(d.charset.size())]);
        pair.push_back(Value::str(s));
      }
      return Value::tuple(std::move(pair));
    }
    case Shape::PointSeq: {
      auto len = rng.uniform_int(d.min_len, d.max_len);
      Value::Children pts;
      for (std::int64_t i = 0; i < len; ++i) {
        auto x = rng.uniform_int(lo, hi);
        auto y = rng.uniform_int(lo, hi);
        pts.push_back(Value::tuple({Value::integer(x), Value::integer(y)}));
      }
      return Value::list(std::move(pts));
    }
  }
  return Value::null();
}

}  // namespace dio
