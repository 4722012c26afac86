#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "dio/hashing.hpp"
#include "dio/rng.hpp"
#include "dio/value.hpp"

namespace dio {
namespace {

Value random_value(Rng& rng, int depth) {
  const auto pick = rng.uniform_int(0, depth > 0 ? 6 : 4);
  switch (pick) {
    case 0:
      return Value::integer(rng.uniform_int(-1'000'000, 1'000'000));
    case 1:
      return Value::real(static_cast<double>(rng.uniform_int(-100000, 100000)) / 64.0 + rng.uniform01());
    case 2:
      return Value::boolean(rng.uniform_int(0, 1) == 1);
    case 3: {
      std::string s;
      const std::string alphabet = "ab c'\"\\\n\tz0";
      for (auto n = rng.uniform_int(0, 6); n > 0; --n) s += alphabet[rng.index(alphabet.size())];
      return Value::str(s);
    }
    case 4:
      return Value::null();
    default: {
      Value::Children kids;
      for (auto n = rng.uniform_int(0, 4); n > 0; --n) kids.push_back(random_value(rng, depth - 1));
      return pick == 5 ? Value::list(std::move(kids)) : Value::tuple(std::move(kids));
    }
  }
}

TEST(Value, TaggedJsonRoundTripProperty) {
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const auto v = random_value(rng, 3);
    EXPECT_EQ(from_tagged_json(to_tagged_json(v)), v) << serialize(v);
    EXPECT_EQ(deserialize(serialize(v)), v) << serialize(v);
  }
}

TEST(Value, LiteralRoundTripProperty) {
  Rng rng(12);
  for (int i = 0; i < 2000; ++i) {
    const auto v = random_value(rng, 3);
    EXPECT_EQ(parse_literal(literal_form(v)), v) << literal_form(v);
  }
}

TEST(Value, TaggedJsonShape) {
  EXPECT_EQ(to_tagged_json(Value::integer(3)).dump(), R"({"k":"i","v":3})");
  EXPECT_EQ(to_tagged_json(Value::int_list({1})).dump(), R"({"k":"l","v":[{"k":"i","v":1}]})");
  EXPECT_EQ(to_tagged_json(Value::null()).dump(), R"({"k":"n"})");
  EXPECT_EQ(to_tagged_json(Value::tuple({Value::boolean(true)})).dump(), R"({"k":"t","v":[{"k":"b","v":true}]})");
  EXPECT_EQ(to_tagged_json(Value::real(0.1)).dump(), R"({"k":"f","v":0.1})");
}

TEST(Value, MalformedTaggedJsonThrows) {
  EXPECT_THROW(from_tagged_json(nlohmann::json::parse(R"({"k":"q","v":1})")), std::invalid_argument);
  EXPECT_THROW(from_tagged_json(nlohmann::json::parse(R"({"k":"i","v":"x"})")), std::invalid_argument);
  EXPECT_THROW(from_tagged_json(nlohmann::json::parse(R"([1,2])")), std::invalid_argument);
  EXPECT_THROW(deserialize("{not json"), std::invalid_argument);
}

TEST(Value, LiteralForms) {
  EXPECT_EQ(literal_form(Value::int_list({2, 2, 3})), "[2, 2, 3]");
  EXPECT_EQ(literal_form(Value::tuple({Value::integer(1), Value::integer(2)})), "(1, 2)");
  EXPECT_EQ(literal_form(Value::tuple({Value::integer(1)})), "(1,)");
  EXPECT_EQ(literal_form(Value::str("abc")), "'abc'");
  EXPECT_EQ(literal_form(Value::boolean(true)), "True");
  EXPECT_EQ(literal_form(Value::null()), "None");
  EXPECT_EQ(literal_form(Value::int_list({})), "[]");
}

TEST(Value, ParseLiteralRejectsGarbage) {
  EXPECT_THROW(parse_literal("[1, 2"), std::invalid_argument);
  EXPECT_THROW(parse_literal("foo"), std::invalid_argument);
  EXPECT_THROW(parse_literal("1 2"), std::invalid_argument);
  EXPECT_THROW(parse_literal(""), std::invalid_argument);
}

TEST(Value, StrictKinds) {
  const auto l = Value::int_list({1, 2});
  const auto t = Value::tuple({Value::integer(1), Value::integer(2)});
  EXPECT_FALSE(values_equal(l, t));
  EXPECT_FALSE(values_equal(Value::integer(1), Value::real(1.0)));
  EXPECT_FALSE(values_equal(Value::integer(1), Value::boolean(true)));
  EXPECT_TRUE(values_equal(Value::real(1.0), Value::real(1.0 + 1e-9)));
  EXPECT_FALSE(values_equal(Value::real(1.0), Value::real(1.0 + 1e-3)));
  EXPECT_FALSE(Value::real(1.0) == Value::real(1.0 + 1e-9));
}

TEST(Value, NonFiniteFloatsRejected) {
  EXPECT_THROW(Value::real(std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
  EXPECT_THROW(Value::real(std::numeric_limits<double>::infinity()), std::invalid_argument);
}

TEST(Value, SizeAndDepth) {
  EXPECT_EQ(size_and_depth(Value::integer(5)), (SizeDepth{1, 1}));
  EXPECT_EQ(size_and_depth(Value::int_list({})), (SizeDepth{1, 2}));
  EXPECT_EQ(size_and_depth(Value::int_list({2, 2})), (SizeDepth{3, 2}));
  EXPECT_EQ(size_and_depth(Value::list({Value::int_list({1}), Value::integer(2)})), (SizeDepth{4, 3}));
}

TEST(Value, WrongAccessorThrows) {
  EXPECT_THROW(Value::integer(1).as_str(), std::logic_error);
  EXPECT_TRUE(Value::integer(1).items().empty());
}

TEST(Hashing, KnownSha256Vectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Rng, SameSeedSameStream) {
  Rng a(5), b(5), c(6);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    differs |= x != c.next_u64();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, UniformIntStaysInRange) {
  Rng rng(1);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto x = rng.uniform_int(-3, 3);
    ASSERT_GE(x, -3);
    ASSERT_LE(x, 3);
    ++hits[static_cast<std::size_t>(x + 3)];
  }
  for (int h : hits) EXPECT_GT(h, 800);
}

TEST(Rng, SampleIndicesAreDistinct) {
  Rng rng(3);
  for (std::size_t n = 0; n < 20; ++n) {
    for (std::size_t k = 0; k <= n + 2; ++k) {
      auto s = rng.sample_indices(n, k);
      EXPECT_EQ(s.size(), std::min(n, k));
      std::sort(s.begin(), s.end());
      EXPECT_EQ(std::adjacent_find(s.begin(), s.end()), s.end());
      for (auto i : s) EXPECT_LT(i, n);
    }
  }
}

TEST(Rng, DerivedSeedsSeparateStreams) {
  EXPECT_NE(derive_seed(1, 2, 3), derive_seed(1, 2, 4));
  EXPECT_NE(derive_seed(1, 2, 3), derive_seed(2, 2, 3));
  EXPECT_EQ(derive_seed(1, 2, 3), derive_seed(1, 2, 3));
}

}  // namespace
}  // namespace dio
