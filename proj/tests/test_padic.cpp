#include "crys/padic.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace crys;
using crys::testing::uniform;

namespace {

// v_p(n!) by factoring every factor.
int factorial_valuation_oracle(int n, int p) {
  int v = 0;
  for (int k = 2; k <= n; ++k) v += vp(k, p);
  return v;
}

}  // namespace

TEST(Padic, SpExamples) {
  EXPECT_EQ(s_p(PExp::integer(6), 2), 4);
  EXPECT_EQ(vp(720, 2), 4);
  EXPECT_EQ(s_p(PExp::integer(0), 2), 0);
  EXPECT_EQ(s_p(PExp(5, 1, 2), 2), 1);
  EXPECT_EQ(s_p(PExp::integer(10), 3), 4);
}

TEST(Padic, MOf) {
  MultiExp a{PExp(1, 2, 2), PExp::integer(3)};
  EXPECT_EQ(m_of(a, 2, 2), 1);
  EXPECT_EQ(m_of(MultiExp{PExp::integer(0)}, 1, 2), 0);
  EXPECT_EQ(m_of(MultiExp{PExp::integer(4)}, 1, 2), 2);
}

TEST(Padic, NegativeInputsRejected) {
  EXPECT_THROW(PExp(-1, 0, 2), std::invalid_argument);
  EXPECT_THROW(legendre(-3, 2), std::invalid_argument);
}

TEST(Padic, LegendreMatchesFactorisation) {
  for (int p : {2, 3, 5})
    for (int n = 0; n <= 2000; ++n) ASSERT_EQ(s_p(PExp::integer(n), p), factorial_valuation_oracle(n, p)) << n;
}

TEST(Padic, SpSuperadditive) {
  for (int p : {2, 3})
    for (int t = 0; t < 500; ++t) {
      PExp a = crys::testing::random_exp(p, 200, 3), b = crys::testing::random_exp(p, 200, 3);
      ASSERT_GE(s_p(PExp::add(a, b, p), p), s_p(a, p) + s_p(b, p));
    }
}

TEST(Padic, ZmodOps) {
  Zmod three(2, 2, 3);
  EXPECT_EQ(three.unit_inverse().value(), 3);
  Zmod six(2, 3, 6);
  EXPECT_EQ(six.divide_by_p(), Zmod(2, 2, 3));
  EXPECT_EQ(Zmod(2, 2, 3) + Zmod(2, 3, 2), Zmod(2, 2, 1));
  EXPECT_EQ((-Zmod(3, 2, 1)).value(), 8);
  EXPECT_EQ(Zmod(2, 4, 8).valuation(), 3);
  EXPECT_EQ(Zmod(2, 4, 0).valuation(), kInfiniteValuation);
}

TEST(Padic, ZmodErrors) {
  EXPECT_THROW(Zmod(2, 2, 2).unit_inverse(), DomainError);
  EXPECT_THROW(Zmod(2, 2, 3).divide_by_p(), DomainError);
  EXPECT_THROW(Zmod(2, 1, 0).divide_by_p(), PrecisionError);
  EXPECT_THROW(Zmod(2, 2, 1) + Zmod(3, 2, 1), PrimeMismatch);
}

TEST(Padic, PExpArithmetic) {
  for (int p : {2, 3})
    for (int t = 0; t < 300; ++t) {
      PExp a = crys::testing::random_exp(p, 50, 3), b = crys::testing::random_exp(p, 50, 3),
           c = crys::testing::random_exp(p, 50, 3);
      ASSERT_EQ(PExp::add(a, b, p), PExp::add(b, a, p));
      ASSERT_EQ(PExp::add(PExp::add(a, b, p), c, p), PExp::add(a, PExp::add(b, c, p), p));
      // order compatibility: a <= b implies a + c <= b + c
      if (PExp::compare(a, b, p) <= 0) ASSERT_TRUE(PExp::compare(PExp::add(a, c, p), PExp::add(b, c, p), p) <= 0);
      ASSERT_EQ(PExp::sub(PExp::add(a, b, p), b, p), a);
    }
}

TEST(Padic, PExpNormalised) {
  PExp a(4, 2, 2);
  EXPECT_EQ(a.num(), 1);
  EXPECT_EQ(a.den_exp(), 0);
  EXPECT_EQ(PExp(3, 1, 2).scaled(1, 2), PExp::integer(3));
  EXPECT_EQ(floor_log_p(PExp(1, 2, 2), 2), -2);
  EXPECT_EQ(floor_log_p(PExp(3, 2, 2), 2), -1);
}

TEST(Padic, QuotientDepth) {
  int p = 2;
  EXPECT_EQ(witt_quotient_depth(MultiExp{PExp(1, 1, p)}, 1, p), 1);
  EXPECT_EQ(witt_quotient_depth(MultiExp{PExp(1, 2, p)}, 1, p), 2);
  EXPECT_EQ(witt_quotient_depth(MultiExp{PExp(3, 1, p)}, 1, p), 0);
  EXPECT_EQ(witt_quotient_depth(MultiExp{PExp::integer(0)}, 1, p), kInfiniteValuation);
}
