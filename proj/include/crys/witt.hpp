#pragma once

// p-typical Witt vectors of finite length over a pluggable coefficient ring.
//
// Length convention: W_r has coordinates a_0..a_{r-1}. bar_w_n follows the
// w_n(a_0, ..., a_n) indexing and takes n+1 coordinates.
//
// A coefficient ring context R provides
//   using value_type;  zero(), one(), from_int(Int), add, mul, neg, equal
// and optionally frob(a) = a^p (characteristic p) and pth_root(a) (perfect).

#include "crys/padic.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

namespace crys {

struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Sparse polynomial with integer coefficients in a fixed number of variables.
struct IntPoly {
  int nvars = 0;
  std::map<std::vector<int>, Int> terms;

  IntPoly() = default;
  explicit IntPoly(int n) : nvars(n) {}

  static IntPoly constant(int n, const Int& c) {
    IntPoly r(n);
    if (c != 0) r.terms[std::vector<int>(n, 0)] = c;
    return r;
  }
  static IntPoly var(int n, int i) {
    IntPoly r(n);
    std::vector<int> e(n, 0);
    e[i] = 1;
    r.terms[e] = 1;
    return r;
  }

  void add_term(const std::vector<int>& e, const Int& c) {
    if (c == 0) return;
    auto [it, fresh] = terms.emplace(e, c);
    if (!fresh) {
      it->second += c;
      if (it->second == 0) terms.erase(it);
    }
  }

  friend IntPoly operator+(IntPoly a, const IntPoly& b) {
    for (const auto& [e, c] : b.terms) a.add_term(e, c);
    return a;
  }
  friend IntPoly operator-(IntPoly a, const IntPoly& b) {
    for (const auto& [e, c] : b.terms) a.add_term(e, -c);
    return a;
  }
  friend IntPoly operator*(const IntPoly& a, const IntPoly& b) {
    IntPoly r(a.nvars);
    std::vector<int> e(a.nvars);
    for (const auto& [ea, ca] : a.terms)
      for (const auto& [eb, cb] : b.terms) {
        for (int i = 0; i < a.nvars; ++i) e[i] = ea[i] + eb[i];
        r.add_term(e, ca * cb);
      }
    return r;
  }
  IntPoly scaled(const Int& k) const {
    IntPoly r(nvars);
    if (k == 0) return r;
    for (const auto& [e, c] : terms) r.terms.emplace(e, c * k);
    return r;
  }
  IntPoly pow(int k, std::size_t term_bound) const {
    IntPoly r = constant(nvars, 1), b = *this;
    while (k > 0) {
      if (k & 1) r = r * b;
      k >>= 1;
      if (k) b = b * b;
      if (r.terms.size() > term_bound || b.terms.size() > term_bound)
        throw ResourceError("structure polynomial exceeds term bound");
    }
    return r;
  }
  /// Exact division by d; an inexact coefficient is an internal error.
  IntPoly div_exact(const Int& d) const {
    IntPoly r(nvars);
    for (const auto& [e, c] : terms) {
      if (c % d != 0) throw InternalError("Witt recursion: inexact division");
      r.terms.emplace(e, c / d);
    }
    return r;
  }
  /// Re-index variables: variable i goes to slot map[i] of an n-variable ring.
  IntPoly remapped(int n, const std::vector<int>& map) const {
    IntPoly r(n);
    for (const auto& [e, c] : terms) {
      std::vector<int> f(n, 0);
      for (int i = 0; i < nvars; ++i) f[map[i]] += e[i];
      r.add_term(f, c);
    }
    return r;
  }
  friend bool operator==(const IntPoly& a, const IntPoly& b) { return a.terms == b.terms; }
};

/// Ghost polynomial w_i = sum_j p^j X_{first+j}^{p^{i-j}} inside an n-variable ring.
inline IntPoly ghost_poly(int p, int i, int n, int first) {
  IntPoly r(n);
  for (int j = 0; j <= i; ++j) {
    std::vector<int> e(n, 0);
    e[first + j] = static_cast<int>(ipow(Int(p), i - j));
    r.add_term(e, ppow(p, j));
  }
  return r;
}

/// Sum, product and negation polynomials of index i in the variables
/// a_0..a_i (slots 0..i), b_0..b_i (slots i+1..2i+1); the Frobenius
/// polynomial of index i in a_0..a_{i+1}.
struct WittStructurePolys {
  int p = 0;
  int i = 0;
  IntPoly S, P, N, F;
};

inline std::size_t& witt_term_bound() {
  static std::size_t bound = 200000;
  return bound;
}

namespace detail {

struct WittPolyCache {
  std::mutex mu;
  std::map<std::pair<int, int>, std::shared_ptr<const WittStructurePolys>> entries;
};

inline WittPolyCache& witt_cache() {
  static WittPolyCache c;
  return c;
}

inline std::shared_ptr<const WittStructurePolys> cached_polys(int p, int i) {
  auto& c = witt_cache();
  std::lock_guard<std::mutex> lock(c.mu);
  auto it = c.entries.find({p, i});
  return it == c.entries.end() ? nullptr : it->second;
}

// Embed a two-block polynomial of index j (blocks of size j+1) into the
// layout of index i.
inline IntPoly embed_two_block(const IntPoly& q, int j, int i) {
  std::vector<int> map(2 * (j + 1));
  for (int t = 0; t <= j; ++t) map[t] = t, map[j + 1 + t] = i + 1 + t;
  return q.remapped(2 * (i + 1), map);
}

}  // namespace detail

inline std::shared_ptr<const WittStructurePolys> gen_structure_polys(int p, int i) {
  check_prime(p);
  if (i < 0) throw std::invalid_argument("gen_structure_polys: negative index");
  if (auto hit = detail::cached_polys(p, i)) return hit;

  std::vector<std::shared_ptr<const WittStructurePolys>> lower;
  for (int j = 0; j < i; ++j) lower.push_back(gen_structure_polys(p, j));

  const int n = 2 * (i + 1);
  const std::size_t bound = witt_term_bound();
  const Int pi = ppow(p, i);
  auto out = std::make_shared<WittStructurePolys>();
  out->p = p;
  out->i = i;

  IntPoly wa = ghost_poly(p, i, n, 0), wb = ghost_poly(p, i, n, i + 1);
  IntPoly s = wa + wb, prod = wa * wb, neg = wa.scaled(-1);
  for (int j = 0; j < i; ++j) {
    int e = static_cast<int>(ipow(Int(p), i - j));
    Int pj = ppow(p, j);
    s = s - detail::embed_two_block(lower[j]->S, j, i).pow(e, bound).scaled(pj);
    prod = prod - detail::embed_two_block(lower[j]->P, j, i).pow(e, bound).scaled(pj);
    neg = neg - detail::embed_two_block(lower[j]->N, j, i).pow(e, bound).scaled(pj);
  }
  out->S = s.div_exact(pi);
  out->P = prod.div_exact(pi);
  out->N = neg.div_exact(pi);

  // Frobenius: w_i(F a) = w_{i+1}(a), variables a_0..a_{i+1}.
  const int nf = i + 2;
  IntPoly f = ghost_poly(p, i + 1, nf, 0);
  for (int j = 0; j < i; ++j) {
    std::vector<int> map(j + 2);
    for (int t = 0; t < j + 2; ++t) map[t] = t;
    int e = static_cast<int>(ipow(Int(p), i - j));
    f = f - lower[j]->F.remapped(nf, map).pow(e, bound).scaled(ppow(p, j));
  }
  out->F = f.div_exact(pi);

  if (out->S.terms.size() > bound || out->P.terms.size() > bound)
    throw ResourceError("structure polynomial exceeds term bound");

  auto& c = detail::witt_cache();
  std::lock_guard<std::mutex> lock(c.mu);
  auto [it, fresh] = c.entries.emplace(std::make_pair(p, i), out);
  return it->second;
}

/// Evaluate an integer polynomial at ring values.
template <class R>
typename R::value_type eval_poly(const IntPoly& poly, const R& ring,
                                 const std::vector<typename R::value_type>& vals) {
  using V = typename R::value_type;
  if (static_cast<int>(vals.size()) < poly.nvars) throw std::invalid_argument("eval_poly: too few values");
  std::vector<std::map<int, V>> powers(vals.size());
  auto power = [&](std::size_t i, int e) -> const V& {
    auto it = powers[i].find(e);
    if (it != powers[i].end()) return it->second;
    V r = ring.one(), b = vals[i];
    for (int k = e; k > 0; k >>= 1) {
      if (k & 1) r = ring.mul(r, b);
      if (k > 1) b = ring.mul(b, b);
    }
    return powers[i].emplace(e, std::move(r)).first->second;
  };
  V acc = ring.zero();
  for (const auto& [e, c] : poly.terms) {
    V t = ring.from_int(c);
    for (int i = 0; i < poly.nvars; ++i)
      if (e[i] != 0) t = ring.mul(t, power(i, e[i]));
    acc = ring.add(acc, t);
  }
  return acc;
}

template <class R>
struct WittVec {
  std::vector<typename R::value_type> c;
  std::size_t length() const { return c.size(); }
};

/// Witt vector arithmetic of a fixed length over the ring context R.
template <class R>
class WittRing {
 public:
  using V = typename R::value_type;
  using Vec = WittVec<R>;

  WittRing(R ring, int p, int length) : ring_(std::move(ring)), p_(p), len_(length) {
    check_prime(p);
    if (length < 1) throw std::invalid_argument("Witt length must be >= 1");
    for (int i = 0; i < length; ++i) polys_.push_back(gen_structure_polys(p, i));
  }

  const R& ring() const { return ring_; }
  int prime() const { return p_; }
  int length() const { return len_; }

  Vec zero() const { return Vec{std::vector<V>(len_, ring_.zero())}; }
  Vec one() const { return teich(ring_.one()); }
  Vec teich(const V& a) const {
    Vec r = zero();
    r.c[0] = a;
    return r;
  }

  Vec add(const Vec& a, const Vec& b) const { return binary(a, b, &WittStructurePolys::S); }
  Vec mul(const Vec& a, const Vec& b) const { return binary(a, b, &WittStructurePolys::P); }
  Vec neg(const Vec& a) const {
    check(a);
    Vec r = zero();
    for (int i = 0; i < len_; ++i) {
      std::vector<V> vals(a.c.begin(), a.c.begin() + i + 1);
      vals.resize(2 * (i + 1), ring_.zero());
      r.c[i] = eval_poly(polys_[i]->N, ring_, vals);
    }
    return r;
  }
  Vec sub(const Vec& a, const Vec& b) const { return add(a, neg(b)); }

  Vec V_shift(const Vec& a) const {
    check(a);
    Vec r = zero();
    for (int i = 1; i < len_; ++i) r.c[i] = a.c[i - 1];
    return r;
  }

  /// Frobenius from the ghost-shift polynomials. Needs one extra input
  /// coordinate; the input is read at length len+1 with the missing top
  /// coordinate taken as zero unless supplied.
  Vec F(const Vec& a, std::optional<V> extra = std::nullopt) const {
    check(a);
    std::vector<V> vals = a.c;
    vals.push_back(extra ? *extra : ring_.zero());
    Vec r = zero();
    for (int i = 0; i < len_; ++i) r.c[i] = eval_poly(polys_[i]->F, ring_, vals);
    return r;
  }

  /// Coordinatewise Frobenius of a characteristic-p coefficient ring.
  Vec F_charp(const Vec& a) const {
    check(a);
    Vec r = a;
    for (auto& x : r.c) x = ring_.frob(x);
    return r;
  }

  std::vector<V> ghost(const Vec& a) const {
    check(a);
    std::vector<V> g;
    for (int i = 0; i < len_; ++i) {
      V acc = ring_.zero();
      for (int j = 0; j <= i; ++j) {
        V t = a.c[j];
        for (int k = 0; k < i - j; ++k) t = pow_p(t);
        acc = ring_.add(acc, ring_.mul(ring_.from_int(ppow(p_, j)), t));
      }
      g.push_back(acc);
    }
    return g;
  }

  Vec from_int(Int k) const {
    bool negative = k < 0;
    if (negative) k = -k;
    Vec r = zero(), b = one();
    while (k > 0) {
      if (k % 2 == 1) r = add(r, b);
      k /= 2;
      if (k > 0) b = add(b, b);
    }
    return negative ? neg(r) : r;
  }

  Vec scalar_int(const Int& k, const Vec& a) const { return mul(from_int(k), a); }

  Vec pow(const Vec& a, int m) const {
    Vec r = one(), b = a;
    for (; m > 0; m >>= 1) {
      if (m & 1) r = mul(r, b);
      if (m > 1) b = mul(b, b);
    }
    return r;
  }

  /// gamma_m(V a) = (p^{m-1}/m!) V(a^m). The rational factor is applied as an
  /// integer modulo p^length, so R must have characteristic p.
  Vec pd_gamma_V(int m, const Vec& a) const {
    if (m <= 0) throw std::invalid_argument("pd_gamma_V: m must be positive");
    int v = m - 1 - legendre(m, p_);
    Int mod = ppow(p_, len_);
    Int k = mod_floor(ppow(p_, v) * inverse_mod(factorial_unit_part(m, p_), mod), mod);
    return scalar_int(k, V_shift(pow(a, m)));
  }

  bool equal(const Vec& a, const Vec& b) const {
    check(a);
    check(b);
    for (int i = 0; i < len_; ++i)
      if (!ring_.equal(a.c[i], b.c[i])) return false;
    return true;
  }

 private:
  void check(const Vec& a) const {
    if (static_cast<int>(a.c.size()) != len_) throw std::invalid_argument("Witt vector length mismatch");
  }
  V pow_p(const V& x) const {
    V r = ring_.one();
    for (int k = 0; k < p_; ++k) r = ring_.mul(r, x);
    return r;
  }
  Vec binary(const Vec& a, const Vec& b, IntPoly WittStructurePolys::*which) const {
    check(a);
    check(b);
    Vec r = zero();
    for (int i = 0; i < len_; ++i) {
      std::vector<V> vals(a.c.begin(), a.c.begin() + i + 1);
      vals.insert(vals.end(), b.c.begin(), b.c.begin() + i + 1);
      r.c[i] = eval_poly((*polys_[i]).*which, ring_, vals);
    }
    return r;
  }

  R ring_;
  int p_;
  int len_;
  std::vector<std::shared_ptr<const WittStructurePolys>> polys_;
};

/// w_n(a_0, ..., a_n) = sum_j p^j a_j^{p^{n-j}} evaluated on lifts in a
/// PD thickening. Takes n+1 coordinates.
template <class R>
typename R::value_type bar_w_n(const R& ring, int p, const std::vector<typename R::value_type>& lifted) {
  if (lifted.empty()) throw std::invalid_argument("bar_w_n: need at least one coordinate");
  int n = static_cast<int>(lifted.size()) - 1;
  auto acc = ring.zero();
  for (int j = 0; j <= n; ++j) {
    auto t = lifted[j];
    for (int k = 0; k < n - j; ++k) {
      auto base = t;
      for (int q = 1; q < p; ++q) t = ring.mul(t, base);
    }
    acc = ring.add(acc, ring.mul(ring.from_int(ppow(p, j)), t));
  }
  return acc;
}

/// Generators V^m([b_j] - [b'_j]), 0 <= m < r, of the kernel of
/// W_r(B) -> W_r(B/I) for B perfect and I generated by b_j - b'_j.
template <class R>
std::vector<WittVec<R>> quotient_kernel_generators(
    const WittRing<R>& W, const std::vector<std::pair<typename R::value_type, typename R::value_type>>& rels) {
  if (!W.ring().is_perfect()) throw DomainError("quotient_kernel_generators: coefficient ring is not perfect");
  std::vector<WittVec<R>> out;
  for (const auto& [b, b2] : rels) {
    WittVec<R> g = W.sub(W.teich(b), W.teich(b2));
    for (int m = 0; m < W.length(); ++m) {
      out.push_back(g);
      g = W.V_shift(g);
    }
  }
  return out;
}

/// The integers as a coefficient ring.
struct IntegerRing {
  using value_type = Int;
  Int zero() const { return 0; }
  Int one() const { return 1; }
  Int from_int(const Int& k) const { return k; }
  Int add(const Int& a, const Int& b) const { return a + b; }
  Int mul(const Int& a, const Int& b) const { return a * b; }
  Int neg(const Int& a) const { return -a; }
  bool equal(const Int& a, const Int& b) const { return a == b; }
  bool is_perfect() const { return false; }
};

/// Z/p^k as a coefficient ring; values are least residues.
struct ZmodRing {
  using value_type = Int;
  int p;
  int k;
  Int mod() const { return ppow(p, k); }
  Int zero() const { return 0; }
  Int one() const { return mod_floor(1, mod()); }
  Int from_int(const Int& x) const { return mod_floor(x, mod()); }
  Int add(const Int& a, const Int& b) const { return mod_floor(a + b, mod()); }
  Int mul(const Int& a, const Int& b) const { return mod_floor(a * b, mod()); }
  Int neg(const Int& a) const { return mod_floor(-a, mod()); }
  bool equal(const Int& a, const Int& b) const { return mod_floor(a - b, mod()) == 0; }
  /// Frobenius of F_p (k = 1) is the identity.
  Int frob(const Int& a) const {
    if (k != 1) throw DomainError("ZmodRing::frob: ring is not of characteristic p");
    return a;
  }
  Int pth_root(const Int& a) const { return frob(a); }
  bool is_perfect() const { return k == 1; }
};

}  // namespace crys
