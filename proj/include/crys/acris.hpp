#pragma once

// A_cris(C)/p^N for the key-example rings as series in the divided
// monomials M_alpha = x^alpha/(alpha!)_p, with x^alpha = p^{s(alpha)} M_alpha.
// Only x-coordinates are divided; y-coordinates ride along.

#include "crys/perf.hpp"
#include "crys/witt.hpp"

#include <map>
#include <vector>

namespace crys {

/// s(alpha) over the x-coordinates of a descriptor.
inline int s_of(const RingDescriptor& d, const MultiExp& a) { return fact_p(a, d.nx, d.p); }

/// Some x-coordinate >= 1.
inline bool is_large(const RingDescriptor& d, const MultiExp& a) { return some_x_at_least_p_pow(a, d.nx, 0, d.p); }

class DividedSeries {
 public:
  explicit DividedSeries(const RingDescriptor& d) : DividedSeries(d, d.prec) {}
  DividedSeries(const RingDescriptor& d, int prec) : d_(d), terms_(ExpLess{d.p}), prec_(prec) {
    if (prec < 1) throw PrecisionError("DividedSeries: precision must be >= 1");
  }

  /// c * M_alpha.
  static DividedSeries monomial(const RingDescriptor& d, const MultiExp& e, const Int& c, int prec) {
    DividedSeries r(d, prec);
    r.add_term(e, c);
    return r;
  }
  static DividedSeries constant(const RingDescriptor& d, const Int& c, int prec) {
    return monomial(d, zero_exp(d), c, prec);
  }

  const RingDescriptor& desc() const { return d_; }
  const CoefMap& terms() const { return terms_; }
  int prec() const { return prec_; }
  Int modulus() const { return ppow(d_.p, prec_); }
  bool is_zero() const { return terms_.empty(); }

  Int coefficient(const MultiExp& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? Int(0) : it->second;
  }

  void add_term(const MultiExp& e, const Int& c) {
    if (static_cast<int>(e.size()) != d_.nvars()) throw std::invalid_argument("exponent arity mismatch");
    Int m = modulus();
    Int v = mod_floor(c, m);
    if (v == 0) return;
    auto [it, fresh] = terms_.emplace(e, v);
    if (!fresh) {
      it->second = mod_floor(it->second + v, m);
      if (it->second == 0) terms_.erase(it);
    }
  }

  friend DividedSeries operator+(const DividedSeries& a, const DividedSeries& b) {
    DividedSeries r = a.meet(b);
    for (const auto& [e, c] : b.terms_) r.add_term(e, c);
    return r;
  }
  DividedSeries operator-() const { return scaled(-1); }
  friend DividedSeries operator-(const DividedSeries& a, const DividedSeries& b) { return a + (-b); }

  friend DividedSeries operator*(const DividedSeries& a, const DividedSeries& b) {
    require_same_ring(a.d_, b.d_);
    const RingDescriptor& d = a.d_;
    DividedSeries r(d, std::min(a.prec_, b.prec_));
    Int m = r.modulus();
    std::vector<int> sb;
    for (const auto& [eb, cb] : b.terms_) sb.push_back(s_of(d, eb));
    for (const auto& [ea, ca] : a.terms_) {
      int sa = s_of(d, ea);
      std::size_t k = 0;
      for (const auto& [eb, cb] : b.terms_) {
        MultiExp e = exp_add(ea, eb, d.p);
        int carry = s_of(d, e) - sa - sb[k++];
        if (carry < 0) throw InternalError("DividedSeries: negative carry exponent");
        if (carry >= r.prec_) continue;
        r.add_term(e, (ca * cb * ppow(d.p, carry)) % m);
      }
    }
    return r;
  }

  DividedSeries scaled(const Int& k) const {
    DividedSeries r(d_, prec_);
    for (const auto& [e, c] : terms_) r.add_term(e, c * k);
    return r;
  }
  DividedSeries pow(Int k) const {
    DividedSeries r = constant(d_, 1, prec_), b = *this;
    while (k > 0) {
      if (k % 2 == 1) r = r * b;
      k /= 2;
      if (k > 0) b = b * b;
    }
    return r;
  }

  DividedSeries with_prec(int n) const {
    if (n > prec_) throw PrecisionError("DividedSeries: cannot raise precision");
    DividedSeries r(d_, n);
    for (const auto& [e, c] : terms_) r.add_term(e, c);
    return r;
  }
  bool congruent(const DividedSeries& o) const {
    int n = std::min(prec_, o.prec_);
    return with_prec(n) == o.with_prec(n);
  }

  /// Augmentation to C: terms with all x-exponents < 1, coefficients mod p.
  TiltPoly aug() const {
    TiltPoly r(d_, 0);
    for (const auto& [e, c] : terms_)
      if (!is_large(d_, e)) r.add_term(e, c);
    return r;
  }

  /// Membership in I_cris: every term with all x-exponents < 1 has p | coefficient.
  bool icris_test() const {
    for (const auto& [e, c] : terms_)
      if (!is_large(d_, e) && c % d_.p != 0) return false;
    return true;
  }

  friend bool operator==(const DividedSeries& a, const DividedSeries& b) {
    return a.d_.same_ring(b.d_) && a.prec_ == b.prec_ && a.terms_ == b.terms_;
  }

  std::string to_string() const {
    if (terms_.empty()) return "0 (mod p^" + std::to_string(prec_) + ")";
    std::string s;
    for (const auto& [e, c] : terms_) s += (s.empty() ? "" : " + ") + c.str() + "*M" + exp_to_string(e);
    return s + " (mod p^" + std::to_string(prec_) + ")";
  }

 private:
  DividedSeries meet(const DividedSeries& b) const {
    require_same_ring(d_, b.d_);
    return prec_ <= b.prec_ ? *this : with_prec(b.prec_);
  }

  RingDescriptor d_;
  CoefMap terms_;
  int prec_;
};

/// W(C^flat)/p^N -> A_cris(C)/p^N: a x^alpha -> a p^{s(alpha)} M_alpha.
inline DividedSeries embed_witt(const WittSeries& w) {
  const RingDescriptor& d = w.desc();
  DividedSeries r(d, w.prec());
  for (const auto& [e, c] : w.terms()) {
    int s = s_of(d, e);
    if (s < w.prec()) r.add_term(e, c * ppow(d.p, s));
  }
  return r;
}

namespace detail {

// gamma_j of a single term c * M_alpha (an element of I_cris), j >= 0.
inline DividedSeries gamma_term(const RingDescriptor& d, const MultiExp& e, const Int& c, int j, int prec) {
  if (j == 0) return DividedSeries::constant(d, 1, prec);
  const int p = d.p;
  MultiExp je = exp_mul_int(e, j, p);
  int vfact = legendre(j, p);
  Int unit_inv = inverse_mod(factorial_unit_part(j, p), ppow(p, prec));
  int v;
  Int base;
  if (is_large(d, e)) {
    v = s_of(d, je) - j * s_of(d, e) - vfact;
    base = c;
  } else {
    if (c % p != 0) throw DomainError("gamma: argument not in I_cris");
    v = j - vfact + s_of(d, je);
    base = c / p;
  }
  if (v < 0) throw InternalError("gamma: negative valuation");
  DividedSeries r(d, prec);
  if (v < prec) r.add_term(je, ipow(base, j) * ppow(p, v) * unit_inv);
  return r;
}

}  // namespace detail

/// Divided power gamma_m on I_cris, expanded over the terms of z.
inline DividedSeries gamma(int m, const DividedSeries& z) {
  if (m < 1) throw std::invalid_argument("gamma: m must be positive");
  if (!z.icris_test()) throw DomainError("gamma: argument not in I_cris");
  const RingDescriptor& d = z.desc();
  const int prec = z.prec();
  std::vector<DividedSeries> acc(m + 1, DividedSeries(d, prec));
  acc[0] = DividedSeries::constant(d, 1, prec);
  for (const auto& [e, c] : z.terms()) {
    std::vector<DividedSeries> g;
    for (int j = 0; j <= m; ++j) g.push_back(detail::gamma_term(d, e, c, j, prec));
    std::vector<DividedSeries> next(m + 1, DividedSeries(d, prec));
    for (int i = 0; i <= m; ++i)
      for (int j = 0; j <= i; ++j)
        if (!g[j].is_zero() && !acc[i - j].is_zero()) next[i] = next[i] + g[j] * acc[i - j];
    acc = std::move(next);
  }
  return acc[m];
}

/// Frobenius: a M_alpha -> a p^{sigma(alpha)} M_{p alpha}.
inline DividedSeries frobF(const DividedSeries& u) {
  const RingDescriptor& d = u.desc();
  DividedSeries r(d, u.prec());
  for (const auto& [e, c] : u.terms()) {
    int sigma = floor_sum(e, d.nx, d.p);
    if (sigma < u.prec()) r.add_term(exp_scaled(e, 1, d.p), c * ppow(d.p, sigma));
  }
  return r;
}

/// F' = F/p on I_cris. Small terms p*b*M_alpha need b, which is known one
/// digit less precisely; the result is at precision N-1.
inline DividedSeries fprime(const DividedSeries& z) {
  if (!z.icris_test()) throw DomainError("fprime: argument not in I_cris");
  const RingDescriptor& d = z.desc();
  if (z.prec() == 1) throw PrecisionError("fprime: precision exhausted");
  DividedSeries r(d, z.prec() - 1);
  for (const auto& [e, c] : z.terms()) {
    MultiExp pe = exp_scaled(e, 1, d.p);
    if (is_large(d, e)) {
      int sigma = floor_sum(e, d.nx, d.p);
      r.add_term(pe, c * ppow(d.p, sigma - 1));
    } else {
      r.add_term(pe, c / d.p);
    }
  }
  return r;
}

/// Canonical map A_cris(C) -> W(C): drop the terms with s(alpha) > 0 and
/// take the W(C) normal form of the rest.
inline WCElement beta(const DividedSeries& u) {
  const RingDescriptor& d = u.desc();
  WittSeries w(d, u.prec());
  for (const auto& [e, c] : u.terms())
    if (s_of(d, e) == 0) w.add_term(e, c);
  return WCElement(w);
}

inline WCElement beta_n(const DividedSeries& u, int n) { return beta(u).with_prec(std::min(n, u.prec())); }

/// (F')^n on Ker beta_n; output at precision N - n.
inline DividedSeries fprime_iter(int n, const DividedSeries& z) {
  if (n < 0) throw std::invalid_argument("fprime_iter: negative n");
  if (n > 0 && n < z.prec() && !beta_n(z, n).is_zero()) throw DomainError("fprime_iter: beta_n(z) != 0");
  DividedSeries r = z;
  for (int k = 0; k < n; ++k) r = fprime(r);
  return r;
}

/// Kernel of W(C^flat) -> C: every term with all x-exponents < 1 has p | a.
inline bool witt_aug_zero(const WittSeries& b) {
  for (const auto& [e, c] : b.terms())
    if (!is_large(b.desc(), e) && c % b.desc().p != 0) return false;
  return true;
}

/// psi(b) = (p-1)! gamma_p(b) + delta(b); b at precision N+1, result at N.
inline DividedSeries psi(const WittSeries& b) {
  if (!witt_aug_zero(b)) throw DomainError("psi: argument not in the augmentation kernel");
  const int p = b.desc().p;
  DividedSeries g = gamma(p, embed_witt(b)).scaled(factorial_unit_part(p - 1, p));
  return g.with_prec(b.prec() - 1) + embed_witt(delta(b));
}

/// e(alpha) = s(alpha) - m(alpha) >= 0, the exponent separating M_alpha from
/// y_alpha = x^alpha / p^{m(alpha)}.
inline int aprime_excess(const RingDescriptor& d, const MultiExp& e) {
  return s_of(d, e) - m_of(e, d.nx, d.p);
}

struct AprimeResult {
  bool in_A1 = false;  // A'
  bool in_A2 = false;  // A''; equal to in_A1 at finite support
  std::map<MultiExp, Zmod, ExpLess> coords;
};

/// Membership in A' and coordinates in the basis y_alpha; coordinates are
/// known modulo p^{N - e(alpha)}.
inline AprimeResult aprime_tests(const DividedSeries& u) {
  const RingDescriptor& d = u.desc();
  AprimeResult r{true, true, std::map<MultiExp, Zmod, ExpLess>(ExpLess{d.p})};
  for (const auto& [e, c] : u.terms()) {
    int ex = aprime_excess(d, e);
    if (vp(c, d.p) < ex) {
      r.in_A1 = r.in_A2 = false;
      r.coords.clear();
      return r;
    }
    if (ex < u.prec()) r.coords.emplace(e, Zmod(d.p, u.prec() - ex, c / ppow(d.p, ex)));
  }
  return r;
}

/// W_N(C) = W(C)/p^N as a coefficient ring for bar_w_n.
struct WCRing {
  using value_type = WCElement;
  RingDescriptor d;
  int prec;
  WCElement zero() const { return WCElement(d, prec); }
  WCElement one() const { return from_int(1); }
  WCElement from_int(const Int& k) const { return WCElement(WittSeries::constant(d, k, prec)); }
  WCElement add(const WCElement& a, const WCElement& b) const { return a + b; }
  WCElement mul(const WCElement& a, const WCElement& b) const { return a * b; }
  WCElement neg(const WCElement& a) const { return zero() - a; }
  bool equal(const WCElement& a, const WCElement& b) const { return a == b; }
};

/// The map W(C^flat) -> W_N(C) of the universal property: bar_w_N applied to
/// lifts of nu_N(a_j), where a_j are the Witt coordinates of w. The default
/// lift is [nu_N(a_j)]; perturb[j] (in V W_N(C)) is added to it.
inline WCElement universal_map(const WittSeries& w, const std::vector<WCElement>& perturb = {}) {
  const RingDescriptor& d = w.desc();
  const int N = w.prec();
  WCRing ring{d, N};
  std::vector<TiltPoly> digits = digit_extract(w);
  std::vector<WCElement> lifts;
  for (int j = 0; j <= N; ++j) {
    WCElement t = j < N ? WCElement(teich_series(digits[j].frob_pow(-N), N)) : ring.zero();
    if (j < static_cast<int>(perturb.size())) {
      if (!perturb[j].in_VW()) throw DomainError("universal_map: perturbation is not in V W(C)");
      t = t + perturb[j].with_prec(N);
    }
    lifts.push_back(t);
  }
  return bar_w_n(ring, d.p, lifts);
}

/// M_alpha as unit * [x^{frac(alpha)}] * prod_i prod_k gamma_{p^k}([x_i])^{d_ik},
/// d_ik the base-p digits of floor(alpha_i). Returns the product.
inline DividedSeries teich_generator_product(const RingDescriptor& d, const MultiExp& alpha, int prec) {
  const int p = d.p;
  MultiExp frac = alpha;
  DividedSeries r = DividedSeries::constant(d, 1, prec);
  for (int i = 0; i < d.nx; ++i) {
    Int n = alpha[i].floor(p);
    frac[i] = PExp::sub(alpha[i], PExp::integer(n), p);
    MultiExp xi = zero_exp(d);
    xi[i] = PExp::integer(1);
    DividedSeries teich_x = embed_witt(WittSeries::monomial(d, xi, 1, prec));
    Int pk = 1;
    for (; n > 0; n /= p, pk *= p) {
      int dk = static_cast<int>(n % p);
      if (dk > 0) r = r * gamma(static_cast<int>(pk), teich_x).pow(dk);
    }
  }
  return r * embed_witt(WittSeries::monomial(d, frac, 1, prec));
}

/// Value forced on the generator decomposition of M_alpha by a PD map to
/// W_N(C): gamma_m([x_i]) goes to gamma_m(0) = 0, [x^f] to its Teichmueller image.
inline WCElement universal_on_monomial(const RingDescriptor& d, const MultiExp& alpha, int prec) {
  for (int i = 0; i < d.nx; ++i)
    if (alpha[i].floor(d.p) > 0) return WCElement(d, prec);
  return WCElement(WittSeries::monomial(d, alpha, 1, prec));
}

/// A_cris(C_0) (x-variables only) with coefficients extended to W(B')
/// (y-variables only) into A_cris(C_0 (x) B'): [y^beta] (x) M_alpha -> M_{(alpha, beta)}.
inline DividedSeries base_change(const RingDescriptor& target, const WittSeries& b, const DividedSeries& u) {
  const RingDescriptor& dx = u.desc();
  const RingDescriptor& dy = b.desc();
  if (dx.p != target.p || dy.p != target.p) throw PrimeMismatch("base_change: prime mismatch");
  if (dx.ny != 0 || dx.nx != target.nx || dy.nx != 0 || dy.ny != target.ny)
    throw std::invalid_argument("base_change: descriptor mismatch");
  DividedSeries r(target, std::min(b.prec(), u.prec()));
  for (const auto& [ea, ca] : u.terms())
    for (const auto& [eb, cb] : b.terms()) {
      MultiExp e = ea;
      e.insert(e.end(), eb.begin(), eb.end());
      r.add_term(e, ca * cb);
    }
  return r;
}

/// Inverse of base_change on normal forms: v = sum_alpha base_change(b_alpha, M_alpha).
inline std::vector<std::pair<WittSeries, DividedSeries>> base_change_inverse(const DividedSeries& v,
                                                                             const RingDescriptor& dx,
                                                                             const RingDescriptor& dy) {
  const RingDescriptor& d = v.desc();
  if (dx.nx != d.nx || dx.ny != 0 || dy.nx != 0 || dy.ny != d.ny)
    throw std::invalid_argument("base_change_inverse: descriptor mismatch");
  std::map<MultiExp, WittSeries, ExpLess> parts(ExpLess{d.p});
  for (const auto& [e, c] : v.terms()) {
    MultiExp ea(e.begin(), e.begin() + d.nx), eb(e.begin() + d.nx, e.end());
    auto it = parts.try_emplace(ea, dy, v.prec()).first;
    it->second.add_term(eb, c);
  }
  std::vector<std::pair<WittSeries, DividedSeries>> out;
  for (const auto& [ea, b] : parts) out.emplace_back(b, DividedSeries::monomial(dx, ea, 1, v.prec()));
  return out;
}

}  // namespace crys
