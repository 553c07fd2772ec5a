#pragma once

#include "crys/padic.hpp"

#include <random>

namespace crys::testing {

inline std::mt19937_64& rng() {
  static std::mt19937_64 g(20240611);
  return g;
}

inline int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng()); }

inline Int uniform_int(const Int& mod) {
  // mod is small in every test; draw 64 bits and reduce.
  Int r = rng()();
  r = (r << 64) + rng()();
  return mod_floor(r, mod);
}

inline PExp random_exp(int p, int max_num, int max_den) {
  return PExp(uniform(0, max_num), uniform(0, max_den), p);
}

}  // namespace crys::testing

#include "crys/perf.hpp"

namespace crys::testing {

/// Random exponent tuple: x-coordinates below x_bound (a power of p is a
/// good choice), denominators up to p^max_den; y-coordinates likewise.
inline MultiExp random_multiexp(const RingDescriptor& d, int x_bound, int max_den) {
  MultiExp e;
  for (int i = 0; i < d.nvars(); ++i) {
    int den = uniform(0, max_den);
    long scale = static_cast<long>(ppow(d.p, den));
    e.emplace_back(Int(uniform(0, static_cast<int>(x_bound * scale) - 1)), den, d.p);
  }
  return e;
}

inline TiltPoly random_tilt(const RingDescriptor& d, int max_terms = 3, int x_bound = 2, int max_den = 2) {
  TiltPoly c(d);
  int n = uniform(0, max_terms);
  for (int t = 0; t < n; ++t) c.add_term(random_multiexp(d, x_bound, max_den), uniform(1, d.p - 1));
  return c;
}

inline WittSeries random_series(const RingDescriptor& d, int prec, int max_terms = 3, int x_bound = 2,
                                int max_den = 2) {
  WittSeries w(d, prec);
  int n = uniform(0, max_terms);
  for (int t = 0; t < n; ++t) w.add_term(random_multiexp(d, x_bound, max_den), uniform_int(ppow(d.p, prec)));
  return w;
}

}  // namespace crys::testing

namespace crys {

inline void PrintTo(const TiltPoly& c, std::ostream* os) { *os << c.to_string() << " [flat " << c.flat_prec() << "]"; }
inline void PrintTo(const WittSeries& w, std::ostream* os) { *os << w.to_string(); }
inline void PrintTo(const WCElement& w, std::ostream* os) { *os << w.to_string(); }

}  // namespace crys

#include "crys/acris.hpp"

namespace crys::testing {

inline DividedSeries random_divided(const RingDescriptor& d, int prec, int max_terms = 3, int x_bound = 4,
                                    int max_den = 2) {
  DividedSeries u(d, prec);
  int n = uniform(0, max_terms);
  for (int t = 0; t < n; ++t) u.add_term(random_multiexp(d, x_bound, max_den), uniform_int(ppow(d.p, prec)));
  return u;
}

/// Random element of I_cris: small terms get a factor p.
inline DividedSeries random_icris(const RingDescriptor& d, int prec, int max_terms = 3, int x_bound = 4,
                                  int max_den = 2) {
  DividedSeries u(d, prec);
  DividedSeries base = random_divided(d, prec, max_terms, x_bound, max_den);
  for (const auto& [e, c] : base.terms())
    u.add_term(e, is_large(d, e) ? c : c * d.p);
  return u;
}

}  // namespace crys::testing

namespace crys {
inline void PrintTo(const DividedSeries& u, std::ostream* os) { *os << u.to_string(); }
}  // namespace crys

#include "crys/covec.hpp"

namespace crys::testing {

/// Random element of M(C): digits at m in [-neg, prec); negative digits are
/// pushed into Ker nu_0 by a factor x_1.
inline VExpansion random_expansion(const RingDescriptor& d, int prec, int neg = 2, int max_terms = 2) {
  VExpansion x(d, prec);
  MultiExp shift = zero_exp(d);
  shift[0] = PExp::integer(1);
  for (int m = -neg; m < prec; ++m) {
    if (uniform(0, 2) == 0) continue;
    TiltPoly c = random_tilt(d, max_terms, 2, 2);
    if (m < 0) c = c * TiltPoly::monomial(d, shift);
    x.set_digit(m, c);
  }
  return x;
}

}  // namespace crys::testing

namespace crys {
inline void PrintTo(const VExpansion& x, std::ostream* os) { *os << x.to_string(); }
}  // namespace crys
