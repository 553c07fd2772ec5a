#pragma once

// The module M(C) of expansions sum_m V^m [x_m] (negative digits in
// Ker nu_0) at finite support, in digit form and in fraction form
// p^{-j} w, and the comparison map f : M(C) -> A_cris(C).

#include "crys/acris.hpp"

#include <map>

namespace crys {

/// sum_m V^m [x_m]; digit form. Digits with m >= prec do not matter.
class VExpansion {
 public:
  VExpansion(const RingDescriptor& d, int prec) : d_(d), prec_(prec) {
    if (prec < 1) throw PrecisionError("VExpansion: precision must be >= 1");
  }

  const RingDescriptor& desc() const { return d_; }
  int prec() const { return prec_; }
  const std::map<int, TiltPoly>& digits() const { return digits_; }
  bool is_zero() const { return digits_.empty(); }

  TiltPoly digit(int m) const {
    auto it = digits_.find(m);
    return it == digits_.end() ? TiltPoly(d_) : it->second;
  }

  void set_digit(int m, const TiltPoly& c) {
    require_same_ring(d_, c.desc());
    if (m < 0 && !c.ker_nu_test(0)) throw DomainError("VExpansion: negative digit outside Ker nu_0");
    if (m >= prec_ || c.is_zero()) {
      digits_.erase(m);
      return;
    }
    digits_.insert_or_assign(m, c);
  }

  int min_index() const { return digits_.empty() ? 0 : digits_.begin()->first; }

  friend bool operator==(const VExpansion& a, const VExpansion& b) {
    return a.d_.same_ring(b.d_) && a.prec_ == b.prec_ && a.digits_ == b.digits_;
  }

  std::string to_string() const {
    if (digits_.empty()) return "0";
    std::string s;
    for (const auto& [m, c] : digits_) s += (s.empty() ? "" : " + ") + ("V^" + std::to_string(m) + "[" + c.to_string() + "]");
    return s;
  }

 private:
  RingDescriptor d_;
  int prec_;
  std::map<int, TiltPoly> digits_;
};

/// p^{-j} w with w at precision N + j.
struct PFraction {
  int j = 0;
  WittSeries w;

  int prec() const { return w.prec() - j; }
  const RingDescriptor& desc() const { return w.desc(); }
};

/// w * p^k, exact, with precision raised by k.
inline WittSeries times_p_pow(const WittSeries& w, int k) {
  WittSeries r(w.desc(), w.prec() + k);
  Int s = ppow(w.desc().p, k);
  for (const auto& [e, c] : w.terms()) r.add_term(e, c * s);
  return r;
}

inline PFraction to_fraction(const VExpansion& x) {
  const RingDescriptor& d = x.desc();
  const int N = x.prec();
  const int j = std::max(0, -x.min_index());
  WittSeries w(d, N + j);
  for (const auto& [m, c] : x.digits()) {
    // p^j V^m [c] = p^{m+j} [c^{p^{-m}}]
    WittSeries t = teich_series(c.frob_pow(-m), N - m);
    w = w + times_p_pow(t, m + j);
  }
  return PFraction{j, w};
}

/// Digit form of p^{-j} w; fails when the element is not in M(C).
inline VExpansion to_expansion(const PFraction& x) {
  const RingDescriptor& d = x.desc();
  const int N = x.prec();
  if (N < 1) throw PrecisionError("to_expansion: precision exhausted");
  VExpansion r(d, N);
  auto digits = digit_extract(x.w);
  for (int k = 0; k < static_cast<int>(digits.size()); ++k) {
    int m = k - x.j;
    if (digits[k].is_zero() || m >= N) continue;
    TiltPoly c = digits[k].frob_pow(-x.j);
    if (m < 0 && !c.ker_nu_test(0)) throw DomainError("to_expansion: element is not in M(C)");
    r.set_digit(m, c);
  }
  return r;
}

inline PFraction fraction_add(const PFraction& a, const PFraction& b) {
  require_same_ring(a.desc(), b.desc());
  int j = std::max(a.j, b.j), N = std::min(a.prec(), b.prec());
  WittSeries wa = times_p_pow(a.w, j - a.j), wb = times_p_pow(b.w, j - b.j);
  return PFraction{j, (wa + wb).with_prec(N + j)};
}

inline PFraction fraction_neg(const PFraction& a) { return PFraction{a.j, -a.w}; }

inline PFraction fraction_sub(const PFraction& a, const PFraction& b) { return fraction_add(a, fraction_neg(b)); }

/// Action of u in W(C^flat): ring multiplication in W(C^flat)[1/p]. On digit
/// form this is V^{-n} x -> V^{-n}((F^{-n} u) x).
inline PFraction fraction_scalar(const WittSeries& u, const PFraction& a) {
  if (u.prec() < a.w.prec()) throw PrecisionError("scalar: multiplier precision too low");
  return PFraction{a.j, u * a.w};
}

inline PFraction fraction_F(const PFraction& a) { return PFraction{a.j, a.w.F()}; }
inline PFraction fraction_V(const PFraction& a) { return PFraction{a.j, a.w.V()}; }

inline VExpansion expansion_add(const VExpansion& a, const VExpansion& b) {
  return to_expansion(fraction_add(to_fraction(a), to_fraction(b)));
}

/// x in p^r M(C): x_m in Ker nu_r for all m < r. Multiplication by p^r shifts
/// digits by r and raises them to the p^r, so these are exactly the digits of
/// p^r y with y in M(C).
inline bool p_power_membership(int r, const VExpansion& x) {
  for (const auto& [m, c] : x.digits()) {
    if (m >= r) break;
    if (!c.ker_nu_test(r)) return false;
  }
  return true;
}

/// a = b in M(C)/p^N.
inline bool equal_mod_pN(const PFraction& a, const PFraction& b) {
  PFraction diff = fraction_sub(a, b);
  VExpansion e = to_expansion(diff);
  return p_power_membership(e.prec(), e);
}

/// M(C) -> W(C): sum_{m >= 0} V^m [nu_0(x_m)].
inline WCElement canonical_epi(const VExpansion& x) {
  std::vector<TiltPoly> nonneg;
  for (int m = 0; m < x.prec(); ++m) nonneg.push_back(x.digit(m));
  return WCElement(series_from_digits(x.desc(), nonneg, x.prec()));
}

/// f(x) = sum_{m>=0} V^m [x_m] + sum_{l>=1} (p^l - 1)! gamma_{p^l}([x_{-l}]).
inline DividedSeries f_map(const VExpansion& x) {
  const RingDescriptor& d = x.desc();
  const int N = x.prec();
  std::vector<TiltPoly> nonneg;
  for (int m = 0; m < N; ++m) nonneg.push_back(x.digit(m));
  DividedSeries r = embed_witt(series_from_digits(d, nonneg, N));
  for (const auto& [m, c] : x.digits()) {
    if (m >= 0) break;
    int l = -m;
    Int pl = ppow(d.p, l);
    Int unit = factorial_unit_part(static_cast<int>(pl) - 1, d.p);
    int v = legendre(pl - 1, d.p);
    if (v >= N) continue;
    DividedSeries g = gamma(static_cast<int>(pl), embed_witt(teich_series(c, N)));
    r = r + g.scaled(unit * ppow(d.p, v));
  }
  return r;
}

inline DividedSeries f_map(const PFraction& x) { return f_map(to_expansion(x)); }

/// Mod-p graded piece: c in Ker nu_i \ Ker nu_{i+1} (any c for i = 0)
/// goes to [c] (i = 0) or V^{-i}[c^{p^{-i}}].
inline VExpansion graded_iso(int i, const TiltPoly& c, int prec) {
  if (i < 0) throw std::invalid_argument("graded_iso: negative degree");
  if (i > 0) {
    for (const auto& [e, v] : c.terms()) {
      TiltPoly mono = TiltPoly::monomial(c.desc(), e);
      if (!mono.ker_nu_test(i) || mono.ker_nu_test(i + 1))
        throw DomainError("graded_iso: element not in the requested graded piece");
    }
  }
  VExpansion r(c.desc(), prec);
  r.set_digit(-i, c.frob_pow(-i));
  return r;
}

/// Inverse of f on A''. Each y_alpha = x^alpha / p^{m(alpha)} is
/// f(V^{-m}[x^{alpha/p^m}]) = f(p^{-m}[x^alpha]), so the preimage is read
/// off the y-coordinates.
inline PFraction f_inverse_fraction(const DividedSeries& u) {
  const RingDescriptor& d = u.desc();
  const int N = u.prec();
  AprimeResult a = aprime_tests(u);
  if (!a.in_A2) throw DomainError("f_inverse: element is not in A''");
  int j = 0;
  for (const auto& [e, b] : a.coords) j = std::max(j, m_of(e, d.nx, d.p));
  WittSeries w(d, N + j);
  for (const auto& [e, b] : a.coords) w.add_term(e, b.value() * ppow(d.p, j - m_of(e, d.nx, d.p)));
  return PFraction{j, w};
}

inline VExpansion f_inverse(const DividedSeries& u) { return to_expansion(f_inverse_fraction(u)); }

}  // namespace crys
