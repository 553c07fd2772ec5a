#pragma once

// Independent evaluation paths used as test oracles.

#include "crys/acris.hpp"

namespace crys::oracle {

/// F' evaluated only through its defining identities:
///   F'(p b) = F(b),  F'(u z) = F(u) F'(z),
///   F'(gamma_n b) = p^{n-1}/n! F'(b)^n,  F'([c]) = (p-1)! gamma_p([c]) for c in Ker nu_0.
/// A large term is split as M_alpha = M_{alpha - n e_i} * M_{n e_i} with
/// n = floor(alpha_i) >= 1, and M_{n e_i} = unit(n!) gamma_n(x_i).
inline DividedSeries fprime_by_identities(const DividedSeries& z) {
  const RingDescriptor& d = z.desc();
  const int p = d.p, N = z.prec();
  DividedSeries out(d, N - 1);
  for (const auto& [e, c] : z.terms()) {
    if (!is_large(d, e)) {
      if (c % p != 0) throw DomainError("oracle: not in I_cris");
      out = out + frobF(DividedSeries::monomial(d, e, c / p, N - 1));
      continue;
    }
    int i = 0;
    while (PExp::compare(e[i], PExp::integer(1), p) < 0) ++i;
    Int n = e[i].floor(p);
    MultiExp rest = e, xi = zero_exp(d);
    rest[i] = PExp::sub(e[i], PExp::integer(n), p);
    xi[i] = PExp::integer(1);
    DividedSeries fx = gamma(p, DividedSeries::monomial(d, xi, 1, N)).scaled(factorial_unit_part(p - 1, p));
    int ni = static_cast<int>(n);
    DividedSeries fm = fx.pow(ni).scaled(ppow(p, ni - 1 - legendre(ni, p)));
    DividedSeries u = DividedSeries::monomial(d, rest, c, N);
    out = out + (frobF(u) * fm).with_prec(N - 1);
  }
  return out;
}

}  // namespace crys::oracle

#include "crys/covec.hpp"

#include <boost/multiprecision/cpp_int.hpp>

namespace crys::oracle {

/// exp(y + y^p/p + y^{p^2}/p^2 + ...) mod (p^N, y^degree) by summing g^j / j!
/// over Q and reducing at the end.
inline std::vector<Int> artin_hasse_by_exp(int p, int N, int degree) {
  using Q = boost::multiprecision::cpp_rational;
  using Poly = std::vector<Q>;
  auto mul = [&](const Poly& a, const Poly& b) {
    Poly r(degree, Q(0));
    for (int i = 0; i < degree; ++i)
      for (int j = 0; i + j < degree; ++j) r[i + j] += a[i] * b[j];
    return r;
  };
  Poly g(degree, Q(0));
  for (long pk = 1; pk < degree; pk *= p) g[pk] = Q(1) / Q(pk);
  Poly sum(degree, Q(0)), term(degree, Q(0));
  term[0] = 1;
  for (int j = 0; j < degree; ++j) {
    for (int i = 0; i < degree; ++i) sum[i] += term[i];
    term = mul(term, g);
    for (auto& t : term) t /= (j + 1);
  }
  Int m = ppow(p, N);
  std::vector<Int> out;
  for (const Q& q : sum) {
    Int num = boost::multiprecision::numerator(q), den = boost::multiprecision::denominator(q);
    out.push_back(mod_floor(num * inverse_mod(den, m), m));
  }
  return out;
}

/// sum_{n in Z} [c^{p^n}] / p^n mod p^N, evaluated as f(sum_n V^n [c]).
inline DividedSeries log_series_via_f(const TiltPoly& c, int N) {
  const RingDescriptor& d = c.desc();
  VExpansion w(d, N);
  int L = 1;
  while (legendre(ppow(d.p, L) - 1, d.p) < N) ++L;
  for (int m = -L; m < N; ++m) w.set_digit(m, c);
  return f_map(w);
}

}  // namespace crys::oracle
