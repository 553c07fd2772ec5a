#include "crys/covec.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace crys;
using crys::testing::random_expansion;
using crys::testing::random_series;
using crys::testing::uniform;

namespace {

RingDescriptor D(int p, int N, int nx = 1, int ny = 0) { return RingDescriptor(p, nx, ny, N); }

TiltPoly X(const RingDescriptor& d, long num, int den = 0) { return TiltPoly::monomial(d, xexp(d, num, den)); }

VExpansion E(const RingDescriptor& d, int N, std::vector<std::pair<int, TiltPoly>> digits) {
  VExpansion x(d, N);
  for (auto& [m, c] : digits) x.set_digit(m, c);
  return x;
}

// f through (F')^j on V^j x = F^{-j} w.
DividedSeries f_by_fprime(const PFraction& x) {
  WittSeries w = x.w;
  for (int i = 0; i < x.j; ++i) w = w.F_inv();
  return fprime_iter(x.j, embed_witt(w));
}

// x in p^r M exactly when p^{-r} x still has an expansion.
bool divisible_by_p_pow(int r, const VExpansion& x) {
  VExpansion lifted(x.desc(), x.prec() + 1);
  for (const auto& [m, c] : x.digits()) lifted.set_digit(m, c);
  PFraction f = to_fraction(lifted);
  try {
    to_expansion(PFraction{f.j + r, f.w});
    return true;
  } catch (const DomainError&) {
    return false;
  }
}

}  // namespace

TEST(Covec, FractionExamples) {
  auto d = D(2, 2);
  PFraction a = to_fraction(E(d, 2, {{-1, X(d, 1)}}));
  EXPECT_EQ(a.j, 1);
  EXPECT_EQ(a.w, WittSeries::monomial(d, xexp(d, 2), 1, 3));
  TiltPoly c = TiltPoly::constant(d, 1) + X(d, 1, 1);
  PFraction b = to_fraction(E(d, 2, {{0, c}}));
  EXPECT_EQ(b.j, 0);
  EXPECT_EQ(b.w, teich_series(c, 2));
  EXPECT_THROW(E(d, 2, {{-1, X(d, 1, 1)}}), DomainError);
}

TEST(Covec, RoundTrip) {
  for (int p : {2, 3}) {
    auto d = D(p, 2, 1, 1);
    for (int t = 0; t < 100; ++t) {
      VExpansion x = random_expansion(d, 2);
      ASSERT_EQ(to_expansion(to_fraction(x)), x);
    }
  }
}

TEST(Covec, ModuleOps) {
  auto d = D(2, 2);
  VExpansion h = E(d, 2, {{0, X(d, 1, 1)}});
  EXPECT_EQ(expansion_add(h, h), E(d, 2, {{1, X(d, 1)}}));
  // u V^{-1}[x] = V^{-1}((F^{-1} u)[x])
  PFraction s = fraction_scalar(WittSeries::monomial(d, xexp(d, 1, 2), 1, 3), to_fraction(E(d, 2, {{-1, X(d, 1)}})));
  EXPECT_EQ(to_expansion(s), E(d, 2, {{-1, X(d, 9, 3)}}));
  for (int p : {2, 3}) {
    auto dd = D(p, 2);
    for (int t = 0; t < 50; ++t) {
      PFraction x = to_fraction(random_expansion(dd, 2)), y = to_fraction(random_expansion(dd, 2)),
                z = to_fraction(random_expansion(dd, 2));
      PFraction px{x.j, x.w.scaled(p)};
      ASSERT_TRUE(equal_mod_pN(fraction_F(fraction_V(x)), px));
      ASSERT_TRUE(equal_mod_pN(fraction_V(fraction_F(x)), px));
      ASSERT_TRUE(equal_mod_pN(fraction_add(x, y), fraction_add(y, x)));
      ASSERT_TRUE(equal_mod_pN(fraction_add(fraction_add(x, y), z), fraction_add(x, fraction_add(y, z))));
    }
  }
}

TEST(Covec, DigitDisjointAdditionIsCoordinatewise) {
  auto d = D(3, 2);
  for (int t = 0; t < 30; ++t) {
    VExpansion a = random_expansion(d, 2), b(d, 2), c(d, 2);
    for (const auto& [m, x] : a.digits()) (m % 2 ? b : c).set_digit(m, x);
    ASSERT_EQ(expansion_add(b, c), a);
  }
}

TEST(Covec, PTorsionFree) {
  for (int p : {2, 3}) {
    auto d = D(p, 3);
    for (int t = 0; t < 50; ++t) {
      VExpansion x = random_expansion(d, 3);
      PFraction fx = to_fraction(x);
      PFraction px{fx.j, fx.w.scaled(p)};
      VExpansion ex = to_expansion(px);
      // p x lies in p^r M exactly when x lies in p^{r-1} M
      for (int r = 1; r <= 3; ++r) {
        ASSERT_EQ(p_power_membership(r, x), divisible_by_p_pow(r, x)) << r;
        ASSERT_EQ(p_power_membership(r, ex), p_power_membership(r - 1, x)) << r;
      }
    }
  }
}

TEST(Covec, CanonicalEpi) {
  auto d = D(2, 2);
  EXPECT_TRUE(canonical_epi(E(d, 2, {{-1, X(d, 1)}})).is_zero());
  EXPECT_EQ(canonical_epi(E(d, 2, {{0, X(d, 1, 1)}})).series(), WittSeries::monomial(d, xexp(d, 1, 1), 1, 2));
  TiltPoly c = TiltPoly::constant(d, 1) + X(d, 1);
  EXPECT_EQ(canonical_epi(E(d, 2, {{1, c}})).series(), WittSeries::constant(d, 2, 2));
}

TEST(Covec, PPowerMembership) {
  auto d = D(2, 2);
  EXPECT_FALSE(p_power_membership(1, E(d, 2, {{0, X(d, 1)}})));
  EXPECT_TRUE(p_power_membership(1, E(d, 2, {{0, X(d, 2)}})));
  EXPECT_TRUE(p_power_membership(2, VExpansion(d, 2)));
  // V[x^2] = p[x] and [x] is not in pM
  EXPECT_FALSE(p_power_membership(2, E(d, 2, {{1, X(d, 2)}})));
  EXPECT_TRUE(p_power_membership(2, E(d, 2, {{1, X(d, 4)}})));
}

TEST(Covec, FMapExamples) {
  auto d = D(2, 2);
  EXPECT_EQ(f_map(E(d, 2, {{-1, X(d, 1)}})), DividedSeries::monomial(d, xexp(d, 2), 1, 2));
  TiltPoly c = TiltPoly::constant(d, 1) + X(d, 3, 2);
  EXPECT_EQ(f_map(E(d, 2, {{0, c}})), embed_witt(teich_series(c, 2)));
  auto d3 = D(2, 3);
  DividedSeries g = gamma(4, DividedSeries::monomial(d3, xexp(d3, 2), ppow(2, s_of(d3, xexp(d3, 2))), 3));
  EXPECT_EQ(f_map(E(d3, 3, {{-2, X(d3, 2)}})), g.scaled(6));
}

TEST(Covec, FMapProperties) {
  for (int p : {2, 3}) {
    auto d = D(p, 2, 1);
    for (int t = 0; t < 60; ++t) {
      VExpansion x = random_expansion(d, 2), y = random_expansion(d, 2);
      PFraction fx = to_fraction(x), fy = to_fraction(y);
      ASSERT_EQ(f_map(fraction_add(fx, fy)), f_map(x) + f_map(y));
      ASSERT_EQ(f_map(fraction_F(fx)), frobF(f_map(x)));
      ASSERT_EQ(beta(f_map(x)), canonical_epi(x));
      ASSERT_EQ(f_map(x), f_by_fprime(fx));
      ASSERT_TRUE(aprime_tests(f_map(x)).in_A2);
    }
  }
}

TEST(Covec, FInverse) {
  auto d = D(2, 2);
  EXPECT_EQ(f_inverse(DividedSeries::monomial(d, xexp(d, 2), 1, 2)), E(d, 2, {{-1, X(d, 1)}}));
  for (int p : {2, 3}) {
    auto dd = D(p, 2, 1, 1);
    for (int t = 0; t < 50; ++t) {
      WittSeries w = random_series(dd, 2, 3, 3);
      ASSERT_TRUE(equal_mod_pN(f_inverse_fraction(embed_witt(w)), PFraction{0, w}));
      VExpansion x = random_expansion(dd, 2);
      // f mod p^N is not injective: the A'' coordinate at alpha is only known
      // mod p^{N - s(alpha) + m(alpha)}. Evaluate f with enough spare digits.
      x = random_expansion(dd, 2, 1, 1);
      VExpansion lifted(dd, 2 + 6);
      for (const auto& [m, c] : x.digits()) lifted.set_digit(m, c);
      PFraction back = f_inverse_fraction(f_map(lifted));
      ASSERT_TRUE(equal_mod_pN(PFraction{back.j, back.w.with_prec(2 + back.j)}, to_fraction(x))) << x.to_string();
      ASSERT_EQ(f_map(f_inverse(f_map(x))), f_map(x));
    }
  }
  EXPECT_THROW(f_inverse(DividedSeries::monomial(D(2, 3), xexp(D(2, 3), 4), 1, 3)), DomainError);
}

TEST(Covec, FModPNotInjective) {
  auto d = D(2, 2, 1, 1);
  MultiExp e = zero_exp(d);
  e[0] = PExp::integer(2);
  e[1] = xexp(d, 1, 1)[0];
  VExpansion x(d, 2);
  x.set_digit(-2, TiltPoly::monomial(d, e));
  EXPECT_TRUE(f_map(x).is_zero());
  EXPECT_FALSE(p_power_membership(2, x));
}

TEST(Covec, GradedIso) {
  auto d = D(2, 2);
  EXPECT_EQ(graded_iso(1, X(d, 3), 2), E(d, 2, {{-1, X(d, 3, 1)}}));
  EXPECT_EQ(graded_iso(0, X(d, 1, 1), 2), E(d, 2, {{0, X(d, 1, 1)}}));
  EXPECT_THROW(graded_iso(2, X(d, 3), 2), DomainError);
  auto d1 = D(2, 1);
  DividedSeries fx = f_map(graded_iso(1, X(d1, 2), 1));
  EXPECT_EQ(fx, DividedSeries::monomial(d1, xexp(d1, 2), 1, 1));
  EXPECT_EQ(aprime_tests(fx).coords.at(xexp(d1, 2)).value(), 1);
}
