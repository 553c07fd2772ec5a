#pragma once

// Key-example rings C = B[x^{1/p^inf}]/(x) with B = F_p[y^{1/p^inf}]:
// elements of the tilt, the series model of W(C^flat)/p^N and its
// W(C) normal form.
//
// Exponent tuples carry the nx quotiented x-variables first and the ny free
// y-variables after them. y-variables never enter the quotient ideal.

#include "crys/padic.hpp"

#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace crys {

inline constexpr int kExactFlat = INT_MAX;

struct RingDescriptor {
  int p = 2;
  int nx = 1;
  int ny = 0;
  int prec = 1;

  RingDescriptor() = default;
  RingDescriptor(int p_, int nx_, int ny_, int prec_) : p(p_), nx(nx_), ny(ny_), prec(prec_) { validate(); }

  int nvars() const { return nx + ny; }
  RingDescriptor with_prec(int n) const { return RingDescriptor(p, nx, ny, n); }
  void validate() const {
    check_prime(p);
    if (nx < 0 || ny < 0) throw std::invalid_argument("descriptor: negative variable count");
    if (prec < 1) throw PrecisionError("descriptor: precision must be >= 1");
  }
  /// Same ring (precision may differ).
  bool same_ring(const RingDescriptor& o) const { return p == o.p && nx == o.nx && ny == o.ny; }
  friend bool operator==(const RingDescriptor&, const RingDescriptor&) = default;
};

inline void require_same_ring(const RingDescriptor& a, const RingDescriptor& b) {
  if (a.p != b.p) throw PrimeMismatch("operands over different primes");
  if (!a.same_ring(b)) throw std::invalid_argument("descriptor mismatch");
}

using CoefMap = std::map<MultiExp, Int, ExpLess>;

inline MultiExp zero_exp(const RingDescriptor& d) { return MultiExp(d.nvars(), PExp::integer(0)); }

/// Exponent tuple from (num, den_exp) pairs.
inline MultiExp make_exp(const RingDescriptor& d, const std::vector<std::pair<long, int>>& coords) {
  if (static_cast<int>(coords.size()) != d.nvars()) throw std::invalid_argument("exponent arity mismatch");
  MultiExp e;
  for (const auto& [n, k] : coords) e.emplace_back(Int(n), k, d.p);
  return e;
}

/// One-x-variable shorthand: x^{num/p^den}.
inline MultiExp xexp(const RingDescriptor& d, long num, int den = 0) {
  MultiExp e = zero_exp(d);
  e.at(0) = PExp(num, den, d.p);
  return e;
}

inline std::string exp_to_string(const MultiExp& e) {
  std::string s = "(";
  for (std::size_t i = 0; i < e.size(); ++i) s += (i ? "," : "") + e[i].to_string();
  return s + ")";
}

inline std::string coefmap_to_string(const CoefMap& m) {
  if (m.empty()) return "0";
  std::string s;
  for (const auto& [e, c] : m) s += (s.empty() ? "" : " + ") + c.str() + "*x^" + exp_to_string(e);
  return s;
}

/// Finite-support element of C^flat / Ker nu_r (r = flat_prec). flat_prec 0
/// means an element of C itself; kExactFlat means exact.
class TiltPoly {
 public:
  explicit TiltPoly(const RingDescriptor& d, int flat_prec = kExactFlat)
      : d_(d), terms_(ExpLess{d.p}), flat_(flat_prec) {
    if (flat_prec < 0) throw PrecisionError("TiltPoly: negative flat precision");
  }

  static TiltPoly monomial(const RingDescriptor& d, const MultiExp& e, const Int& c = 1, int flat = kExactFlat) {
    TiltPoly r(d, flat);
    r.add_term(e, c);
    r.truncate();
    return r;
  }
  static TiltPoly constant(const RingDescriptor& d, const Int& c, int flat = kExactFlat) {
    return monomial(d, zero_exp(d), c, flat);
  }

  const RingDescriptor& desc() const { return d_; }
  const CoefMap& terms() const { return terms_; }
  int flat_prec() const { return flat_; }
  bool is_exact() const { return flat_ == kExactFlat; }
  bool is_zero() const { return terms_.empty(); }

  void add_term(const MultiExp& e, const Int& c) {
    if (static_cast<int>(e.size()) != d_.nvars()) throw std::invalid_argument("exponent arity mismatch");
    Int v = mod_floor(c, d_.p);
    if (v == 0) return;
    auto [it, fresh] = terms_.emplace(e, v);
    if (!fresh) {
      it->second = mod_floor(it->second + v, d_.p);
      if (it->second == 0) terms_.erase(it);
    }
  }

  friend TiltPoly operator+(const TiltPoly& a, const TiltPoly& b) {
    TiltPoly r = a.meet(b);
    for (const auto& [e, c] : b.terms_) r.add_term(e, c);
    r.truncate();
    return r;
  }
  TiltPoly operator-() const {
    TiltPoly r(d_, flat_);
    for (const auto& [e, c] : terms_) r.add_term(e, -c);
    return r;
  }
  friend TiltPoly operator-(const TiltPoly& a, const TiltPoly& b) { return a + (-b); }
  friend TiltPoly operator*(const TiltPoly& a, const TiltPoly& b) {
    require_same_ring(a.d_, b.d_);
    TiltPoly r(a.d_, std::min(a.flat_, b.flat_));
    for (const auto& [ea, ca] : a.terms_)
      for (const auto& [eb, cb] : b.terms_) {
        MultiExp e = exp_add(ea, eb, a.d_.p);
        if (r.dropped(e)) continue;
        r.add_term(e, ca * cb);
      }
    return r;
  }
  TiltPoly pow(Int k) const {
    TiltPoly r = constant(d_, 1, flat_), b = *this;
    while (k > 0) {
      if (k % 2 == 1) r = r * b;
      k /= 2;
      if (k > 0) b = b * b;
    }
    return r;
  }

  /// Absolute Frobenius c -> c^p realised on exponents; raises flat_prec.
  TiltPoly frob() const { return frob_pow(1); }
  /// Inverse Frobenius; lowers flat_prec.
  TiltPoly frob_inv() const { return frob_pow(-1); }
  TiltPoly frob_pow(int k) const {
    int flat = flat_;
    if (flat != kExactFlat) {
      if (k < 0 && flat + k < 1) throw PrecisionError("frob_inv: flat precision exhausted");
      flat += k;
    }
    TiltPoly r(d_, flat);
    for (const auto& [e, c] : terms_) r.add_term(exp_scaled(e, k, d_.p), c);
    return r;
  }

  /// Image in C = C^flat / Ker nu_0.
  TiltPoly aug_to_C() const { return with_flat_prec(0); }

  TiltPoly with_flat_prec(int r) const {
    if (r > flat_) throw PrecisionError("TiltPoly: cannot raise flat precision");
    TiltPoly out = *this;
    out.flat_ = r;
    out.truncate();
    return out;
  }

  /// c in Ker nu_r: every monomial has some x-exponent >= p^r.
  bool ker_nu_test(int r) const {
    if (r > flat_) throw PrecisionError("ker_nu_test: flat precision too small");
    for (const auto& [e, c] : terms_)
      if (!some_x_at_least_p_pow(e, d_.nx, r, d_.p)) return false;
    return true;
  }

  /// Any product of this many elements of Ker(Fr^j) vanishes in C.
  static Int fr_kernel_nilpotency(const RingDescriptor& d, int j) { return Int(d.nx) * ppow(d.p, j); }

  friend bool operator==(const TiltPoly& a, const TiltPoly& b) {
    return a.d_.same_ring(b.d_) && a.flat_ == b.flat_ && a.terms_ == b.terms_;
  }
  /// Equality after truncating both sides to the smaller flat precision.
  bool congruent(const TiltPoly& o) const {
    int r = std::min(flat_, o.flat_);
    return with_flat_prec(r) == o.with_flat_prec(r);
  }

  std::string to_string() const { return coefmap_to_string(terms_); }

 private:
  bool dropped(const MultiExp& e) const {
    return flat_ != kExactFlat && some_x_at_least_p_pow(e, d_.nx, flat_, d_.p);
  }
  void truncate() {
    if (flat_ == kExactFlat) return;
    for (auto it = terms_.begin(); it != terms_.end();)
      it = dropped(it->first) ? terms_.erase(it) : std::next(it);
  }
  TiltPoly meet(const TiltPoly& b) const {
    require_same_ring(d_, b.d_);
    TiltPoly r = *this;
    r.flat_ = std::min(flat_, b.flat_);
    r.truncate();
    return r;
  }

  RingDescriptor d_;
  CoefMap terms_;
  int flat_;
};

/// C^flat / Ker nu_r as a coefficient ring for generic Witt vectors.
struct TiltRing {
  using value_type = TiltPoly;
  RingDescriptor d;
  int flat = kExactFlat;

  TiltPoly zero() const { return TiltPoly(d, flat); }
  TiltPoly one() const { return TiltPoly::constant(d, 1, flat); }
  TiltPoly from_int(const Int& k) const { return TiltPoly::constant(d, k, flat); }
  TiltPoly add(const TiltPoly& a, const TiltPoly& b) const { return a + b; }
  TiltPoly mul(const TiltPoly& a, const TiltPoly& b) const { return a * b; }
  TiltPoly neg(const TiltPoly& a) const { return -a; }
  bool equal(const TiltPoly& a, const TiltPoly& b) const { return a.congruent(b); }
  /// x -> x^p as a ring endomorphism (flat precision unchanged).
  TiltPoly frob(const TiltPoly& a) const { return a.pow(d.p); }
  TiltPoly pth_root(const TiltPoly& a) const {
    if (!a.is_exact()) throw PrecisionError("pth_root needs an exact element");
    return a.frob_inv();
  }
  bool is_perfect() const { return flat == kExactFlat; }
};

/// Element of W(C^flat)/p^prec as a finite series sum a_alpha x^alpha with
/// x^alpha the product of Teichmueller powers.
class WittSeries {
 public:
  explicit WittSeries(const RingDescriptor& d) : WittSeries(d, d.prec) {}
  WittSeries(const RingDescriptor& d, int prec) : d_(d), terms_(ExpLess{d.p}), prec_(prec) {
    if (prec < 1) throw PrecisionError("WittSeries: precision must be >= 1");
  }

  static WittSeries monomial(const RingDescriptor& d, const MultiExp& e, const Int& c, int prec) {
    WittSeries r(d, prec);
    r.add_term(e, c);
    return r;
  }
  static WittSeries constant(const RingDescriptor& d, const Int& c, int prec) {
    return monomial(d, zero_exp(d), c, prec);
  }
  /// Coefficientwise integer lift of an element of the tilt.
  static WittSeries lift(const TiltPoly& c, int prec) {
    WittSeries r(c.desc(), prec);
    for (const auto& [e, v] : c.terms()) r.add_term(e, v);
    return r;
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

  friend WittSeries operator+(const WittSeries& a, const WittSeries& b) {
    WittSeries r = a.meet(b);
    for (const auto& [e, c] : b.terms_) r.add_term(e, c);
    return r;
  }
  WittSeries operator-() const { return scaled(-1); }
  friend WittSeries operator-(const WittSeries& a, const WittSeries& b) { return a + (-b); }
  friend WittSeries operator*(const WittSeries& a, const WittSeries& b) {
    require_same_ring(a.d_, b.d_);
    WittSeries r(a.d_, std::min(a.prec_, b.prec_));
    Int m = r.modulus();
    for (const auto& [ea, ca] : a.terms_)
      for (const auto& [eb, cb] : b.terms_) r.add_term(exp_add(ea, eb, a.d_.p), (ca * cb) % m);
    return r;
  }
  WittSeries scaled(const Int& k) const {
    WittSeries r(d_, prec_);
    for (const auto& [e, c] : terms_) r.add_term(e, c * k);
    return r;
  }
  WittSeries pow(Int k) const {
    WittSeries r = constant(d_, 1, prec_), b = *this;
    while (k > 0) {
      if (k % 2 == 1) r = r * b;
      k /= 2;
      if (k > 0) b = b * b;
    }
    return r;
  }

  /// F: x^alpha -> x^{p alpha} on every coordinate.
  WittSeries F() const { return frob_pow(1); }
  WittSeries F_inv() const { return frob_pow(-1); }
  WittSeries frob_pow(int k) const {
    WittSeries r(d_, prec_);
    for (const auto& [e, c] : terms_) r.terms_.emplace(exp_scaled(e, k, d_.p), c);
    return r;
  }
  /// V = p F^{-1}; the result is determined one digit further.
  WittSeries V() const {
    WittSeries r(d_, prec_ + 1);
    for (const auto& [e, c] : terms_) r.add_term(exp_scaled(e, -1, d_.p), c * d_.p);
    return r;
  }

  WittSeries with_prec(int n) const {
    if (n > prec_) throw PrecisionError("WittSeries: cannot raise precision");
    WittSeries r(d_, n);
    for (const auto& [e, c] : terms_) r.add_term(e, c);
    return r;
  }

  /// Exact division by p; costs one digit.
  WittSeries divide_by_p() const {
    if (prec_ == 1) throw PrecisionError("divide_by_p: precision exhausted");
    WittSeries r(d_, prec_ - 1);
    for (const auto& [e, c] : terms_) {
      if (c % d_.p != 0) throw DomainError("divide_by_p: coefficient not divisible by p");
      r.add_term(e, c / d_.p);
    }
    return r;
  }

  /// Reduction mod p as an exact element of the tilt.
  TiltPoly mod_p() const {
    TiltPoly r(d_);
    for (const auto& [e, c] : terms_) r.add_term(e, c);
    return r;
  }

  friend bool operator==(const WittSeries& a, const WittSeries& b) {
    return a.d_.same_ring(b.d_) && a.prec_ == b.prec_ && a.terms_ == b.terms_;
  }
  /// Equality at the smaller precision.
  bool congruent(const WittSeries& o) const {
    int n = std::min(prec_, o.prec_);
    return with_prec(n) == o.with_prec(n);
  }

  std::string to_string() const { return coefmap_to_string(terms_) + " (mod p^" + std::to_string(prec_) + ")"; }

 private:
  WittSeries meet(const WittSeries& b) const {
    require_same_ring(d_, b.d_);
    return prec_ <= b.prec_ ? *this : with_prec(b.prec_);
  }

  RingDescriptor d_;
  CoefMap terms_;
  int prec_;
};

/// Teichmueller lift [c] mod p^N: (lift of c^{p^{-(N-1)}})^{p^{N-1}}.
inline WittSeries teich_series(const TiltPoly& c, int N) {
  if (N < 1) throw PrecisionError("teich_series: precision must be >= 1");
  if (!c.is_exact() && c.flat_prec() < N) throw PrecisionError("teich_series: flat precision below N");
  TiltPoly root = c.frob_pow(-(N - 1));
  if (c.is_zero()) return WittSeries(c.desc(), N);
  if (c.terms().size() == 1 && c.terms().begin()->second == 1)
    return WittSeries::monomial(c.desc(), c.terms().begin()->first, 1, N);  // [x^alpha] = x^alpha
  return WittSeries::lift(root, N).pow(ppow(c.desc().p, N - 1));
}

/// delta(b) = (F(b) - b^p)/p; input at precision N+1, output at N.
inline WittSeries delta(const WittSeries& b) {
  WittSeries t = b.F() - b.pow(b.desc().p);
  for (const auto& [e, c] : t.terms())
    if (c % b.desc().p != 0) throw InternalError("delta: F(b) - b^p not divisible by p");
  return t.divide_by_p();
}

/// Element of W(C)/p^N in normal form: the coefficient at alpha is kept
/// modulo p^{min(N, t(alpha))}.
class WCElement {
 public:
  explicit WCElement(const WittSeries& w) : s_(normalize(w)) {}
  WCElement(const RingDescriptor& d, int prec) : s_(d, prec) {}

  const WittSeries& series() const { return s_; }
  const RingDescriptor& desc() const { return s_.desc(); }
  int prec() const { return s_.prec(); }
  bool is_zero() const { return s_.is_zero(); }

  friend WCElement operator+(const WCElement& a, const WCElement& b) { return WCElement(a.s_ + b.s_); }
  friend WCElement operator-(const WCElement& a, const WCElement& b) { return WCElement(a.s_ - b.s_); }
  friend WCElement operator*(const WCElement& a, const WCElement& b) { return WCElement(a.s_ * b.s_); }
  WCElement F() const { return WCElement(s_.F()); }
  WCElement V() const { return WCElement(s_.V()); }
  WCElement with_prec(int n) const { return WCElement(s_.with_prec(n)); }

  /// Membership in V W(C) (= p W(C) for semiperfect C).
  bool in_VW() const {
    for (const auto& [e, c] : s_.terms())
      if (c % desc().p != 0) return false;
    return true;
  }
  /// V^{-1} on V W(C): F(u/p), one digit lower.
  WCElement V_inv() const {
    if (!in_VW()) throw DomainError("V_inv: element not in V W(C)");
    if (prec() == 1) return WCElement(desc(), 1);
    WittSeries q(desc(), prec() - 1);
    for (const auto& [e, c] : s_.terms()) q.add_term(e, c / desc().p);
    return WCElement(q.F());
  }

  friend bool operator==(const WCElement& a, const WCElement& b) { return a.s_ == b.s_; }
  std::string to_string() const { return s_.to_string(); }

  static WittSeries normalize(const WittSeries& w) {
    const RingDescriptor& d = w.desc();
    WittSeries r(d, w.prec());
    for (const auto& [e, c] : w.terms()) {
      int t = witt_quotient_depth(e, d.nx, d.p);
      int m = std::min(w.prec(), t);
      if (m == 0) continue;
      r.add_term(e, mod_floor(c, ppow(d.p, m)));
    }
    return r;
  }

 private:
  WittSeries s_;
};

inline WCElement wc_normal_form(const WittSeries& w) { return WCElement(w); }

/// Image in W_r(C) = W(C)/p^r.
inline WCElement beta_r(const WittSeries& w, int r) { return WCElement(w.with_prec(std::min(r, w.prec()))); }

/// Digits (c_0, ..., c_{N-1}) with w = sum V^m [c_m] mod p^N. Digits are exact.
inline std::vector<TiltPoly> digit_extract(const WittSeries& w) {
  std::vector<TiltPoly> digits;
  WittSeries cur = w;
  const int N = w.prec();
  for (int m = 0; m < N; ++m) {
    TiltPoly c = cur.mod_p();
    digits.push_back(c);
    if (m + 1 == N) break;
    cur = (cur - teich_series(c, cur.prec())).divide_by_p().F();
  }
  return digits;
}

/// sum_m V^m [c_m] = sum_m p^m [c_m^{p^{-m}}] mod p^N.
inline WittSeries series_from_digits(const RingDescriptor& d, const std::vector<TiltPoly>& digits, int N) {
  WittSeries r(d, N);
  for (int m = 0; m < std::min<int>(N, static_cast<int>(digits.size())); ++m) {
    if (digits[m].is_zero()) continue;
    WittSeries t = teich_series(digits[m].frob_pow(-m), N - m);
    WittSeries scaled(d, N);
    for (const auto& [e, c] : t.terms()) scaled.add_term(e, c * ppow(d.p, m));
    r = r + scaled;
  }
  return r;
}

}  // namespace crys
