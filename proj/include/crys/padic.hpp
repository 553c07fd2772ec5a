#pragma once

// Exact base arithmetic: integers mod p^N with precision tags, p-adic
// valuations, factorial valuations and exponents in Z_+[1/p].

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <climits>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace crys {

using Int = boost::multiprecision::cpp_int;

/// Raised when two values over different primes meet.
struct PrimeMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Raised when an operation needs more precision than its input carries.
struct PrecisionError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Raised for violated mathematical preconditions (non-unit inverse, a value
/// outside the domain of a partially defined map, ...).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Internal consistency failure. Seeing one of these means a bug.
struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

inline constexpr int kInfiniteValuation = INT_MAX;

inline void check_prime(int p) {
  if (p < 2) throw std::invalid_argument("prime must be >= 2");
  for (int d = 2; d * d <= p; ++d)
    if (p % d == 0) throw std::invalid_argument("p = " + std::to_string(p) + " is not prime");
}

inline Int ipow(const Int& base, int e) {
  if (e < 0) throw std::invalid_argument("ipow: negative exponent");
  Int r = 1, b = base;
  while (e > 0) {
    if (e & 1) r *= b;
    b *= b;
    e >>= 1;
  }
  return r;
}

inline Int ppow(int p, int e) { return ipow(Int(p), e); }

/// v_p(x), with kInfiniteValuation for x = 0.
inline int vp(Int x, int p) {
  if (x == 0) return kInfiniteValuation;
  if (x < 0) x = -x;
  int v = 0;
  while (x % p == 0) {
    x /= p;
    ++v;
  }
  return v;
}

/// Least nonnegative residue.
inline Int mod_floor(const Int& x, const Int& m) {
  Int r = x % m;
  if (r < 0) r += m;
  return r;
}

/// Inverse of a unit modulo m (extended Euclid).
inline Int inverse_mod(const Int& a, const Int& m) {
  Int g = mod_floor(a, m), x = 0, x1 = 1, r = m, r1 = g;
  while (r1 != 0) {
    Int q = r / r1;
    Int t = r - q * r1;
    r = r1;
    r1 = t;
    t = x - q * x1;
    x = x1;
    x1 = t;
  }
  if (r != 1) throw DomainError("inverse_mod: not a unit");
  return mod_floor(x, m);
}

/// p-part of n! (Legendre): sum_{j>=1} floor(n/p^j).
inline int legendre(Int n, int p) {
  if (n < 0) throw std::invalid_argument("legendre: negative input");
  int s = 0;
  while (n > 0) {
    n /= p;
    s += static_cast<int>(n);
  }
  return s;
}

/// n! with its p-part removed, as an integer.
inline Int factorial_unit_part(int n, int p) {
  Int r = 1;
  for (int k = 2; k <= n; ++k) {
    int m = k;
    while (m % p == 0) m /= p;
    r *= m;
  }
  return r;
}

/// An element of Z/p^prec. Binary operations meet precisions.
class Zmod {
 public:
  Zmod(int p, int prec, const Int& value = 0) : p_(p), prec_(prec) {
    if (prec < 1) throw PrecisionError("Zmod: precision must be >= 1");
    value_ = mod_floor(value, modulus());
  }

  int prime() const { return p_; }
  int prec() const { return prec_; }
  const Int& value() const { return value_; }
  Int modulus() const { return ppow(p_, prec_); }

  int valuation() const {
    int v = vp(value_, p_);
    return v == kInfiniteValuation ? kInfiniteValuation : std::min(v, prec_);
  }
  bool is_zero() const { return value_ == 0; }

  friend Zmod operator+(const Zmod& a, const Zmod& b) {
    int pr = meet(a, b);
    return Zmod(a.p_, pr, a.value_ + b.value_);
  }
  friend Zmod operator-(const Zmod& a, const Zmod& b) {
    int pr = meet(a, b);
    return Zmod(a.p_, pr, a.value_ - b.value_);
  }
  friend Zmod operator*(const Zmod& a, const Zmod& b) {
    int pr = meet(a, b);
    return Zmod(a.p_, pr, a.value_ * b.value_);
  }
  Zmod operator-() const { return Zmod(p_, prec_, -value_); }

  Zmod unit_inverse() const {
    if (value_ % p_ == 0) throw DomainError("unit_inverse: value is divisible by p");
    return Zmod(p_, prec_, inverse_mod(value_, modulus()));
  }

  /// Exact division by p; the result loses one digit.
  Zmod divide_by_p() const {
    if (prec_ == 1) throw PrecisionError("divide_by_p: precision exhausted");
    if (value_ % p_ != 0) throw DomainError("divide_by_p: value not divisible by p");
    return Zmod(p_, prec_ - 1, value_ / p_);
  }

  Zmod with_prec(int prec) const {
    if (prec > prec_) throw PrecisionError("Zmod: cannot raise precision");
    return Zmod(p_, prec, value_);
  }

  friend bool operator==(const Zmod& a, const Zmod& b) {
    return a.p_ == b.p_ && a.prec_ == b.prec_ && a.value_ == b.value_;
  }

  std::string to_string() const {
    return value_.str() + " mod " + std::to_string(p_) + "^" + std::to_string(prec_);
  }

 private:
  static int meet(const Zmod& a, const Zmod& b) {
    if (a.p_ != b.p_) throw PrimeMismatch("Zmod: operands over different primes");
    return std::min(a.prec_, b.prec_);
  }

  int p_;
  int prec_;
  Int value_;
};

/// A nonnegative element num / p^den_exp of Z_+[1/p], kept normalized
/// (den_exp == 0 or p does not divide num). The prime is supplied by the
/// ambient descriptor; operations take it explicitly.
class PExp {
 public:
  PExp() = default;
  PExp(Int num, int den_exp, int p) : num_(std::move(num)), den_(den_exp) {
    if (num_ < 0) throw std::invalid_argument("PExp: negative exponent");
    if (den_ < 0) throw std::invalid_argument("PExp: negative denominator exponent");
    normalize(p);
  }
  static PExp integer(const Int& n) {
    PExp e;
    if (n < 0) throw std::invalid_argument("PExp: negative exponent");
    e.num_ = n;
    return e;
  }

  const Int& num() const { return num_; }
  int den_exp() const { return den_; }
  bool is_zero() const { return num_ == 0; }

  /// floor of the value.
  Int floor(int p) const { return num_ / ppow(p, den_); }

  /// this * p^k (k may be negative).
  PExp scaled(int k, int p) const {
    if (num_ == 0) return *this;
    PExp r = *this;
    if (k >= 0) {
      int take = std::min(k, r.den_);
      r.den_ -= take;
      r.num_ *= ppow(p, k - take);
    } else {
      r = PExp(r.num_, r.den_ - k, p);
    }
    return r;
  }

  static PExp add(const PExp& a, const PExp& b, int p) {
    int d = std::max(a.den_, b.den_);
    Int n = a.num_ * ppow(p, d - a.den_) + b.num_ * ppow(p, d - b.den_);
    return PExp(std::move(n), d, p);
  }
  /// a - b; requires a >= b.
  static PExp sub(const PExp& a, const PExp& b, int p) {
    int d = std::max(a.den_, b.den_);
    Int n = a.num_ * ppow(p, d - a.den_) - b.num_ * ppow(p, d - b.den_);
    if (n < 0) throw std::invalid_argument("PExp::sub: negative result");
    return PExp(std::move(n), d, p);
  }
  static PExp mul_int(const PExp& a, const Int& m, int p) { return PExp(a.num_ * m, a.den_, p); }

  friend bool operator==(const PExp& a, const PExp& b) { return a.den_ == b.den_ && a.num_ == b.num_; }

  /// Value comparison; normalized forms make equality prime-independent.
  static std::strong_ordering compare(const PExp& a, const PExp& b, int p) {
    if (a.den_ == b.den_) return cmp(a.num_, b.num_);
    int d = std::max(a.den_, b.den_);
    return cmp(a.num_ * ppow(p, d - a.den_), b.num_ * ppow(p, d - b.den_));
  }

  std::string to_string() const {
    if (den_ == 0) return num_.str();
    return num_.str() + "/p^" + std::to_string(den_);
  }

 private:
  static std::strong_ordering cmp(const Int& x, const Int& y) {
    if (x < y) return std::strong_ordering::less;
    if (y < x) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }
  void normalize(int p) {
    if (num_ == 0) {
      den_ = 0;
      return;
    }
    while (den_ > 0 && num_ % p == 0) {
      num_ /= p;
      --den_;
    }
  }

  Int num_ = 0;
  int den_ = 0;
};

/// floor(log_p(a)) for a > 0.
inline int floor_log_p(const PExp& a, int p) {
  if (a.is_zero()) throw std::invalid_argument("floor_log_p of zero");
  Int n = a.num();
  int k = -1;
  while (n > 0) {
    n /= p;
    ++k;
  }
  // num in [p^k, p^{k+1}), so log_p(num / p^den) lies in [k - den, k + 1 - den).
  return k - a.den_exp();
}

/// s_p(y) = sum_{j>=1} floor(y / p^j), the exponent of (y!)_p.
inline int s_p(const PExp& y, int p) { return legendre(y.floor(p), p); }

/// Exponent tuple (x-coordinates first, then y-coordinates). The split index
/// lives in the ring descriptor.
using MultiExp = std::vector<PExp>;

/// Strict weak order on MultiExp by lexicographic comparison of values.
struct ExpLess {
  int p;
  bool operator()(const MultiExp& a, const MultiExp& b) const {
    for (std::size_t i = 0; i < a.size(); ++i) {
      auto c = PExp::compare(a[i], b[i], p);
      if (c != 0) return c < 0;
    }
    return false;
  }
};

inline MultiExp exp_add(const MultiExp& a, const MultiExp& b, int p) {
  if (a.size() != b.size()) throw std::invalid_argument("exponent arity mismatch");
  MultiExp r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = PExp::add(a[i], b[i], p);
  return r;
}

inline MultiExp exp_scaled(const MultiExp& a, int k, int p) {
  MultiExp r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i].scaled(k, p);
  return r;
}

inline MultiExp exp_mul_int(const MultiExp& a, const Int& m, int p) {
  MultiExp r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = PExp::mul_int(a[i], m, p);
  return r;
}

inline bool exp_is_zero(const MultiExp& a) {
  return std::all_of(a.begin(), a.end(), [](const PExp& e) { return e.is_zero(); });
}

/// Exponent of (alpha!)_p over the first nx coordinates.
inline int fact_p(const MultiExp& alpha, int nx, int p) {
  int s = 0;
  for (int i = 0; i < nx; ++i) s += s_p(alpha[i], p);
  return s;
}

/// sum_i floor(alpha_i) over the first nx coordinates; s(p*alpha) - s(alpha).
inline int floor_sum(const MultiExp& alpha, int nx, int p) {
  Int s = 0;
  for (int i = 0; i < nx; ++i) s += alpha[i].floor(p);
  return static_cast<int>(s);
}

/// m(alpha) = max(0, floor(log_p alpha_1), ..., floor(log_p alpha_nx)).
inline int m_of(const MultiExp& alpha, int nx, int p) {
  int m = 0;
  for (int i = 0; i < nx; ++i)
    if (!alpha[i].is_zero()) m = std::max(m, floor_log_p(alpha[i], p));
  return m;
}

/// Largest x-coordinate compared against p^r: true iff some alpha_i >= p^r.
/// r may be negative.
inline bool some_x_at_least_p_pow(const MultiExp& alpha, int nx, int r, int p) {
  PExp bound = r >= 0 ? PExp::integer(ppow(p, r)) : PExp(1, -r, p);
  for (int i = 0; i < nx; ++i)
    if (PExp::compare(alpha[i], bound, p) >= 0) return true;
  return false;
}

/// t(alpha): least m >= 0 with some x-coordinate >= p^{-m}; kInfiniteValuation
/// when every x-coordinate is zero.
inline int witt_quotient_depth(const MultiExp& alpha, int nx, int p) {
  int best = kInfiniteValuation;
  for (int i = 0; i < nx; ++i) {
    if (alpha[i].is_zero()) continue;
    int f = floor_log_p(alpha[i], p);
    // alpha_i >= p^{-m}  <=>  m >= -floor(log_p alpha_i)
    best = std::min(best, std::max(0, -f));
  }
  return best;
}

}  // namespace crys
