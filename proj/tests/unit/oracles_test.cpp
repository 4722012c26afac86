#include <gtest/gtest.h>

#include "dio/error.hpp"
#include "dio/task_catalog.hpp"
#include "oracle_refs.hpp"

namespace dio {
namespace {

using testing::oracle_references;

TEST(Oracles, EveryOracleHasAReference) {
  const auto ids = oracle_ids();
  EXPECT_EQ(ids.size(), oracle_references().size());
  for (const auto& id : ids) EXPECT_TRUE(oracle_references().count(id)) << id;
}

class OracleAgreement : public ::testing::TestWithParam<std::string> {};

TEST_P(OracleAgreement, MatchesReferenceOn200SeededInputs) {
  const auto& o = find_oracle(GetParam());
  const auto& ref = oracle_references().at(GetParam());
  Rng rng(testing::oracle_check_seed(GetParam()));
  for (int i = 0; i < 200; ++i) {
    const auto in = sample_input(o, rng);
    std::string why;
    ASSERT_TRUE(conforms(o, in, &why)) << literal_form(in) << ": " << why;
    const auto got = oracle_eval(o.id, in);
    const auto want = ref(in);
    ASSERT_TRUE(values_equal(got, want, 1e-9)) << o.id << "(" << literal_form(in) << ") = " << literal_form(got)
                                               << ", reference " << literal_form(want);
  }
}

INSTANTIATE_TEST_SUITE_P(AllOracles, OracleAgreement, ::testing::ValuesIn(oracle_ids()),
                         [](const auto& info) { return info.param; });

TEST(Oracles, WorkedPrimeValues) {
  EXPECT_EQ(oracle_eval("prime_factorization", Value::integer(1)), Value::int_list({}));
  EXPECT_EQ(oracle_eval("prime_factorization", Value::integer(12)), Value::int_list({2, 2, 3}));
  EXPECT_EQ(oracle_eval("prime_factorization", Value::integer(30)), Value::int_list({2, 3, 5}));
}

TEST(Oracles, OutOfDomainInputIsRejected) {
  EXPECT_THROW(oracle_eval("prime_factorization", Value::integer(0)), DomainViolation);
  EXPECT_THROW(oracle_eval("prime_factorization", Value::str("7")), DomainViolation);
  EXPECT_THROW(oracle_eval("rpn_eval", Value::str("1 +")), DomainViolation);
  EXPECT_THROW(oracle_eval("sort_list", Value::tuple({Value::integer(1), Value::integer(2), Value::integer(3)})),
               DomainViolation);
}

TEST(Oracles, UnknownIdThrows) { EXPECT_THROW(oracle_eval("no_such_oracle", Value::integer(1)), UnknownOracle); }

}  // namespace
}  // namespace dio
