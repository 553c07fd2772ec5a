#pragma once

// Units of C^flat congruent to 1, the Artin-Hasse exponential, and the
// logarithm c -> log[c] into A_cris(C)^{F=p} with its explicit inverse.

#include "crys/acris.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <vector>

namespace crys {

/// Truncated power series in one variable t with coefficients mod p^prec;
/// coeffs[k] is the coefficient of t^k, k < degree.
struct IntSeries {
  int p = 2;
  int prec = 1;
  std::vector<Int> coeffs;

  int degree() const { return static_cast<int>(coeffs.size()); }
  Int modulus() const { return ppow(p, prec); }

  friend IntSeries operator*(const IntSeries& a, const IntSeries& b) {
    if (a.p != b.p) throw PrimeMismatch("IntSeries: prime mismatch");
    IntSeries r{a.p, std::min(a.prec, b.prec), std::vector<Int>(std::min(a.degree(), b.degree()), 0)};
    Int m = r.modulus();
    for (int i = 0; i < r.degree(); ++i)
      for (int j = 0; i + j < r.degree(); ++j) r.coeffs[i + j] += a.coeffs[i] * b.coeffs[j];
    for (auto& c : r.coeffs) c = mod_floor(c, m);
    return r;
  }
  friend bool operator==(const IntSeries& a, const IntSeries& b) {
    return a.p == b.p && a.prec == b.prec && a.coeffs == b.coeffs;
  }

  /// f(t^k), same degree bound.
  IntSeries substitute_power(int k) const {
    IntSeries r{p, prec, std::vector<Int>(coeffs.size(), 0)};
    for (int i = 0; i * k < degree(); ++i) r.coeffs[i * k] = coeffs[i];
    return r;
  }

  std::string to_string() const {
    std::string s;
    for (int k = 0; k < degree(); ++k) {
      if (coeffs[k] == 0) continue;
      if (!s.empty()) s += " + ";
      s += coeffs[k].str() + (k == 0 ? "" : "*t^" + std::to_string(k));
    }
    return s.empty() ? "0" : s;
  }
};

/// E_p(t) mod (p^N, t^degree). Uses t E'/E = sum_k t^{p^k}, i.e.
/// n a_n = sum_{p^k <= n} a_{n - p^k}, over Q.
inline IntSeries artin_hasse(int p, int N, int degree) {
  check_prime(p);
  if (N < 1 || degree < 1) throw std::invalid_argument("artin_hasse: bad precision or degree");
  using Q = boost::multiprecision::cpp_rational;
  std::vector<Q> a(degree, Q(0));
  a[0] = 1;
  for (int n = 1; n < degree; ++n) {
    Q s = 0;
    for (Int pk = 1; pk <= n; pk *= p) s += a[n - static_cast<int>(pk)];
    a[n] = s / n;
  }
  IntSeries r{p, N, std::vector<Int>(degree, 0)};
  Int m = ppow(p, N);
  for (int n = 0; n < degree; ++n) {
    Int num = boost::multiprecision::numerator(a[n]), den = boost::multiprecision::denominator(a[n]);
    if (den % p == 0) throw InternalError("artin_hasse: coefficient not p-integral");
    r.coeffs[n] = mod_floor(num * inverse_mod(den, m), m);
  }
  return r;
}

/// Witt coordinates of an integer in W(F_p) = Z_p: a = sum_i p^i [b_i].
inline std::vector<int> witt_digits_fp(const Zmod& a) {
  const int p = a.prime(), N = a.prec();
  Int m = ppow(p, N), v = a.value();
  std::vector<int> b;
  for (int i = 0; i < N; ++i) {
    int d = static_cast<int>(mod_floor(v, p));
    b.push_back(d);
    Int t = mod_floor(boost::multiprecision::powm(Int(d), ppow(p, N - 1), m), m);
    v = mod_floor(v - t, m) / p;
  }
  return b;
}

/// f^a(t) = prod_i E_p(b_i t^{p^i}) in F_p[[t]] mod t^degree.
inline IntSeries witt_to_unit_series(const Zmod& a, int degree) {
  const int p = a.prime();
  IntSeries e = artin_hasse(p, 1, degree);
  IntSeries r{p, 1, std::vector<Int>(degree, 0)};
  r.coeffs[0] = 1;
  std::vector<int> b = witt_digits_fp(a);
  Int pi = 1;
  for (int i = 0; i < static_cast<int>(b.size()) && pi < degree; ++i, pi *= p) {
    if (b[i] == 0) continue;
    IntSeries f = e;
    Int bk = 1;
    for (auto& c : f.coeffs) {
      c = mod_floor(c * bk, p);
      bk *= b[i];
    }
    r = r * f.substitute_power(static_cast<int>(pi));
  }
  return r;
}

/// exp(p z) = prod over terms t of z of sum_k (p^k / k!) t^k, for z with no
/// term of x-degree 0. For t = c M_alpha with largest x-exponent a the k-th
/// summand has valuation >= k if a >= 1 and >= 1 + v_p(floor(k a)!) if a < 1.
inline DividedSeries exp_py(const DividedSeries& z) {
  const RingDescriptor& d = z.desc();
  const int p = d.p, N = z.prec();
  Int mod = ppow(p, N);
  DividedSeries r = DividedSeries::constant(d, 1, N);
  for (const auto& [e, c] : z.terms()) {
    PExp a = PExp::integer(0);
    for (int i = 0; i < d.nx; ++i)
      if (PExp::compare(e[i], a, p) > 0) a = e[i];
    if (a.is_zero()) throw DomainError("exp_py: argument has a term of x-degree 0");
    const bool big = PExp::compare(a, PExp::integer(1), p) >= 0;
    DividedSeries t = DividedSeries::monomial(d, e, c, N), tk = DividedSeries::constant(d, 1, N);
    DividedSeries sum = tk;
    for (int k = 1;; ++k) {
      int bound = big ? k : 1 + legendre(PExp::mul_int(a, k, p).floor(p), p);
      bound = std::max(bound, (k * (p - 2) + 1) / (p - 1));
      if (bound >= N) break;
      tk = tk * t;
      int v = k - legendre(k, p);
      if (v < N) sum = sum + tk.scaled(ppow(p, v) * inverse_mod(factorial_unit_part(k, p), mod));
    }
    r = r * sum;
  }
  return r;
}

/// Element of H(C) = Ker((C^flat)^x -> C^x): c = 1 + (element of Ker nu_0),
/// known modulo Ker nu_r with r = flat precision.
class UnitElement {
 public:
  explicit UnitElement(TiltPoly c) : c_(std::move(c)) {
    if (!(c_.aug_to_C() == TiltPoly::constant(c_.desc(), 1, 0)))
      throw DomainError("UnitElement: not congruent to 1 modulo Ker nu_0");
  }
  static UnitElement one(const RingDescriptor& d, int flat) { return UnitElement(TiltPoly::constant(d, 1, flat)); }

  const TiltPoly& value() const { return c_; }
  const RingDescriptor& desc() const { return c_.desc(); }
  int flat_prec() const { return c_.flat_prec(); }
  bool is_one() const { return c_ == TiltPoly::constant(desc(), 1, flat_prec()); }

  friend UnitElement operator*(const UnitElement& a, const UnitElement& b) { return UnitElement(a.c_ * b.c_); }
  friend bool operator==(const UnitElement& a, const UnitElement& b) { return a.c_ == b.c_; }
  std::string to_string() const { return c_.to_string(); }

 private:
  TiltPoly c_;
};

/// g(t) evaluated at t in Ker nu_0, modulo Ker nu_r: powers of t vanish from
/// degree nx p^r on.
inline TiltPoly eval_series_fp(const IntSeries& g, const TiltPoly& t) {
  if (!t.ker_nu_test(0)) throw DomainError("eval_series: argument not in Ker nu_0");
  const RingDescriptor& d = t.desc();
  TiltPoly r(d, t.flat_prec()), tk = TiltPoly::constant(d, 1, t.flat_prec());
  for (int k = 0; k < g.degree() && !tk.is_zero(); ++k) {
    if (g.coeffs[k] % d.p != 0) r = r + tk * TiltPoly::constant(d, g.coeffs[k], t.flat_prec());
    tk = tk * t;
  }
  if (!tk.is_zero()) throw InternalError("eval_series: degree bound too small");
  return r;
}

/// Degree bound after which powers of an element of Ker nu_0 vanish mod Ker nu_r.
inline int unit_degree_bound(const RingDescriptor& d, int r) {
  return static_cast<int>(TiltPoly::fr_kernel_nilpotency(d, r)) + 1;
}

/// E_p(c) modulo Ker nu_r for c in Ker nu_0.
inline UnitElement artin_hasse_unit(const TiltPoly& c, int r) {
  TiltPoly t = c.is_exact() ? c.with_flat_prec(r) : c;
  return UnitElement(eval_series_fp(artin_hasse(c.desc().p, 1, unit_degree_bound(c.desc(), t.flat_prec())), t));
}

/// log[c] = -sum_{n>=1} (n-1)! gamma_n(1 - [c]) mod p^N. (n-1)! gamma_n is an
/// integral operation, so the terms with v_p((n-1)!) >= N drop out and no
/// precision reserve is needed.
inline DividedSeries log_teich(const UnitElement& c, int N) {
  const RingDescriptor& d = c.desc();
  const int p = d.p;
  if (c.flat_prec() < N) throw PrecisionError("log_teich: flat precision below N");
  DividedSeries z = DividedSeries::constant(d, 1, N) - embed_witt(teich_series(c.value(), N));
  DividedSeries r(d, N);
  for (int n = 1; legendre(n - 1, p) < N; ++n) {
    Int f = factorial_unit_part(n - 1, p) * ppow(p, legendre(n - 1, p));
    r = r - gamma(n, z).scaled(f);
  }
  if (!(frobF(r) == r.scaled(p))) throw InternalError("log_teich: F(log) != p log");
  return r;
}

/// Inverse of log on A_cris^{F=p}: c = prod_{alpha in S} f^{a_alpha}(x^alpha),
/// S = [0,p)^nx minus [0,1)^nx, a_alpha in W(B) the coefficient at M_alpha.
inline UnitElement solve_units(const DividedSeries& u) {
  const RingDescriptor& d = u.desc();
  const int p = d.p, N = u.prec();
  if (!(frobF(u) == u.scaled(p))) throw DomainError("solve_units: F(u) != p u");
  if (!aprime_tests(u).in_A1) throw DomainError("solve_units: u is not in A'");
  // group the coefficients by x-part alpha in S
  std::map<MultiExp, WittSeries, ExpLess> coeff(ExpLess{p});
  for (const auto& [e, c] : u.terms()) {
    MultiExp ax = e, by = zero_exp(d);
    bool in_s = false, below_p = true;
    for (int i = 0; i < d.nx; ++i) {
      below_p = below_p && PExp::compare(e[i], PExp::integer(p), p) < 0;
      in_s = in_s || PExp::compare(e[i], PExp::integer(1), p) >= 0;
    }
    if (!in_s || !below_p) continue;
    for (int i = d.nx; i < d.nvars(); ++i) {
      by[i] = e[i];
      ax[i] = PExp::integer(0);
    }
    coeff.try_emplace(ax, d, N).first->second.add_term(by, c);
  }
  const int deg = unit_degree_bound(d, N);
  IntSeries ep = artin_hasse(p, 1, deg);
  TiltPoly out = TiltPoly::constant(d, 1, N);
  for (const auto& [alpha, a] : coeff) {
    std::vector<TiltPoly> b = digit_extract(a);
    for (int i = 0; i < static_cast<int>(b.size()); ++i) {
      if (b[i].is_zero()) continue;
      TiltPoly xa = TiltPoly::monomial(d, exp_scaled(alpha, i, p), 1, N);
      if (xa.is_zero()) continue;
      out = out * eval_series_fp(ep, b[i].with_flat_prec(N) * xa);
    }
  }
  return UnitElement(out);
}

/// The steps of the injectivity argument for log at a finite truncation.
struct InjectivityCertificate {
  DividedSeries p_power_minus_one;   // ([c]^p - 1) / p
  DividedSeries p2_power_minus_one;  // ([c]^{p^2} - 1) / p^2, empty when N < 2
  bool c_p2_is_one = false;
  bool c_is_one = false;
};

inline InjectivityCertificate injectivity_certificate(const UnitElement& c, int N) {
  const RingDescriptor& d = c.desc();
  const int p = d.p;
  if (!log_teich(c, N).is_zero()) throw DomainError("injectivity_certificate: log[c] != 0");
  DividedSeries one = DividedSeries::constant(d, 1, N);
  DividedSeries tc = embed_witt(teich_series(c.value(), N));
  auto divide = [&](const DividedSeries& v, int k) {
    DividedSeries q(d, N);
    if (k >= N) return q;
    Int pk = ppow(p, k);
    for (const auto& [e, a] : v.terms()) {
      if (a % pk != 0) throw InternalError("injectivity_certificate: chain fails, not divisible by p^" + std::to_string(k));
      q.add_term(e, a / pk);
    }
    return q.with_prec(N - k);
  };
  InjectivityCertificate cert{divide(tc.pow(p) - one, 1), DividedSeries(d, N)};
  cert.p2_power_minus_one = divide(tc.pow(p * p) - one, 2);
  TiltPoly cp2 = c.value().frob_pow(2);
  cert.c_p2_is_one = cp2 == TiltPoly::constant(d, 1, cp2.flat_prec());
  cert.c_is_one = c.is_one();
  if (!cert.c_p2_is_one || !cert.c_is_one) throw InternalError("injectivity_certificate: chain fails, c != 1");
  return cert;
}

}  // namespace crys
