#pragma once

// Linear algebra over the chain ring Z/p^k: Howell form of row spans,
// Smith form, kernels and elementary divisors.

#include "crys/padic.hpp"

#include <utility>
#include <vector>

namespace crys {

using Row = std::vector<Int>;
using Matrix = std::vector<Row>;

inline Matrix zero_matrix(std::size_t rows, std::size_t cols) { return Matrix(rows, Row(cols, Int(0))); }

inline Matrix identity_matrix(std::size_t n) {
  Matrix m = zero_matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1;
  return m;
}

inline Matrix mat_mul(const Matrix& a, const Matrix& b, const Int& mod) {
  std::size_t n = a.size(), inner = b.size(), m = inner ? b[0].size() : 0;
  Matrix r = zero_matrix(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t t = 0; t < inner; ++t) {
      if (a[i][t] == 0) continue;
      for (std::size_t j = 0; j < m; ++j) r[i][j] += a[i][t] * b[t][j];
    }
  if (mod != 0)
    for (auto& row : r)
      for (auto& v : row) v = mod_floor(v, mod);
  return r;
}

inline Matrix mat_transpose(const Matrix& a) {
  if (a.empty()) return {};
  Matrix r = zero_matrix(a[0].size(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[0].size(); ++j) r[j][i] = a[i][j];
  return r;
}

/// Entries reduced into [0, mod); mod == 0 means exact.
inline Matrix mat_reduce(Matrix a, const Int& mod) {
  if (mod == 0) return a;
  for (auto& row : a)
    for (auto& v : row) v = mod_floor(v, mod);
  return a;
}

inline Row mat_vec(const Matrix& a, const Row& x, const Int& mod) {
  Row r(a.size(), Int(0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) r[i] += a[i][j] * x[j];
    if (mod != 0) r[i] = mod_floor(r[i], mod);
  }
  return r;
}

inline bool is_zero_row(const Row& r) {
  for (const auto& v : r)
    if (v != 0) return false;
  return true;
}

/// Canonical generating set (Howell form) of the row span of `rows` in
/// (Z/p^k)^ncols. Equal spans give equal outputs.
inline Matrix howell_form(Matrix rows, std::size_t ncols, int p, int k) {
  const Int mod = ppow(p, k);
  for (auto& r : rows) {
    if (r.size() != ncols) throw std::invalid_argument("howell_form: row width mismatch");
    for (auto& v : r) v = mod_floor(v, mod);
  }
  Matrix out;
  std::vector<std::pair<std::size_t, int>> pivots;  // column, valuation
  for (std::size_t c = 0; c < ncols; ++c) {
    int best = kInfiniteValuation;
    std::size_t bi = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      int v = vp(rows[i][c], p);
      if (v < best) best = v, bi = i;
    }
    if (best == kInfiniteValuation || best >= k) continue;
    Row piv = rows[bi];
    rows.erase(rows.begin() + static_cast<std::ptrdiff_t>(bi));
    Int unit = piv[c] / ppow(p, best);
    Int inv = inverse_mod(unit, mod);
    for (auto& v : piv) v = mod_floor(v * inv, mod);
    for (auto& r : rows) {
      if (r[c] == 0) continue;
      Int q = r[c] / ppow(p, best);
      for (std::size_t j = 0; j < ncols; ++j) r[j] = mod_floor(r[j] - q * piv[j], mod);
    }
    if (best > 0) {
      Row ann = piv;
      Int s = ppow(p, k - best);
      for (auto& v : ann) v = mod_floor(v * s, mod);
      if (!is_zero_row(ann)) rows.push_back(std::move(ann));
    }
    pivots.emplace_back(c, best);
    out.push_back(std::move(piv));
  }
  // Reduce entries above each pivot.
  for (std::size_t t = 0; t < out.size(); ++t) {
    auto [c, v] = pivots[t];
    Int pv = ppow(p, v);
    for (std::size_t u = 0; u < t; ++u) {
      Int q = out[u][c] / pv;
      if (q == 0) continue;
      for (std::size_t j = 0; j < ncols; ++j) out[u][j] = mod_floor(out[u][j] - q * out[t][j], mod);
    }
  }
  return out;
}

/// Smith decomposition L*A*R = D over Z/p^k with L, R invertible.
struct SmithResult {
  Matrix L, R;
  std::vector<int> diag_val;  // valuations of the nonzero diagonal entries, ascending
};

inline SmithResult smith_form(Matrix a, int p, int k) {
  const Int mod = ppow(p, k);
  std::size_t n = a.size(), m = n ? a[0].size() : 0;
  a = mat_reduce(std::move(a), mod);
  SmithResult res{identity_matrix(n), identity_matrix(m), {}};
  auto row_op = [&](Matrix& x, std::size_t dst, std::size_t src, const Int& q) {
    for (std::size_t j = 0; j < x[dst].size(); ++j) x[dst][j] = mod_floor(x[dst][j] - q * x[src][j], mod);
  };
  auto col_op = [&](Matrix& x, std::size_t dst, std::size_t src, const Int& q) {
    for (auto& row : x) row[dst] = mod_floor(row[dst] - q * row[src], mod);
  };
  for (std::size_t t = 0; t < std::min(n, m); ++t) {
    int best = kInfiniteValuation;
    std::size_t bi = t, bj = t;
    for (std::size_t i = t; i < n; ++i)
      for (std::size_t j = t; j < m; ++j) {
        int v = vp(a[i][j], p);
        if (v < best) best = v, bi = i, bj = j;
      }
    if (best == kInfiniteValuation) break;
    std::swap(a[t], a[bi]);
    std::swap(res.L[t], res.L[bi]);
    for (auto& row : a) std::swap(row[t], row[bj]);
    for (auto& row : res.R) std::swap(row[t], row[bj]);
    Int pv = ppow(p, best);
    Int inv = inverse_mod(a[t][t] / pv, mod);
    for (auto& v : a[t]) v = mod_floor(v * inv, mod);
    for (auto& v : res.L[t]) v = mod_floor(v * inv, mod);
    for (std::size_t i = t + 1; i < n; ++i) {
      Int q = a[i][t] / pv;
      if (q != 0) row_op(a, i, t, q), row_op(res.L, i, t, q);
    }
    for (std::size_t j = t + 1; j < m; ++j) {
      Int q = a[t][j] / pv;
      if (q != 0) col_op(a, j, t, q), col_op(res.R, j, t, q);
    }
    res.diag_val.push_back(best);
  }
  return res;
}

/// Generators of {x : A x = 0} in (Z/p^k)^ncols.
inline Matrix kernel_mod(const Matrix& a, std::size_t ncols, int p, int k) {
  const Int mod = ppow(p, k);
  if (a.empty()) return identity_matrix(ncols);
  SmithResult s = smith_form(a, p, k);
  Matrix gens;
  for (std::size_t i = 0; i < ncols; ++i) {
    Int scale = i < s.diag_val.size() ? ppow(p, k - s.diag_val[i]) : Int(1);
    if (i < s.diag_val.size() && s.diag_val[i] == 0) continue;
    Row g(ncols);
    for (std::size_t r = 0; r < ncols; ++r) g[r] = mod_floor(s.R[r][i] * scale, mod);
    if (!is_zero_row(g)) gens.push_back(std::move(g));
  }
  return howell_form(std::move(gens), ncols, p, k);
}

/// Invariant factors of the submodule of (Z/p^k)^ncols spanned by `rows`:
/// the module is the direct sum of Z/p^{e} for each returned e (descending).
inline std::vector<int> span_invariants(const Matrix& rows, std::size_t ncols, int p, int k) {
  std::vector<int> out;
  if (rows.empty() || ncols == 0) return out;
  for (int v : smith_form(rows, p, k).diag_val)
    if (v < k) out.push_back(k - v);
  return out;
}

/// Inverse over Z/p^k; throws DomainError when the matrix is not invertible mod p.
inline Matrix mat_inverse(Matrix a, int p, int k) {
  const Int mod = ppow(p, k);
  const std::size_t n = a.size();
  a = mat_reduce(std::move(a), mod);
  Matrix inv = identity_matrix(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t r = c;
    while (r < n && a[r][c] % p == 0) ++r;
    if (r == n) throw DomainError("mat_inverse: matrix not invertible mod p");
    std::swap(a[r], a[c]);
    std::swap(inv[r], inv[c]);
    Int u = inverse_mod(a[c][c], mod);
    for (std::size_t j = 0; j < n; ++j) {
      a[c][j] = mod_floor(a[c][j] * u, mod);
      inv[c][j] = mod_floor(inv[c][j] * u, mod);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == c || a[i][c] == 0) continue;
      Int q = a[i][c];
      for (std::size_t j = 0; j < n; ++j) {
        a[i][j] = mod_floor(a[i][j] - q * a[c][j], mod);
        inv[i][j] = mod_floor(inv[i][j] - q * inv[c][j], mod);
      }
    }
  }
  return inv;
}

inline Matrix mat_pow(const Matrix& a, Int e, const Int& mod) {
  Matrix r = mat_reduce(identity_matrix(a.size()), mod), b = mat_reduce(a, mod);
  while (e > 0) {
    if (e % 2 == 1) r = mat_mul(r, b, mod);
    e /= 2;
    if (e > 0) b = mat_mul(b, b, mod);
  }
  return r;
}

inline bool same_span(const Matrix& a, const Matrix& b, std::size_t ncols, int p, int k) {
  return howell_form(a, ncols, p, k) == howell_form(b, ncols, p, k);
}

inline bool in_span(const Row& v, const Matrix& rows, std::size_t ncols, int p, int k) {
  Matrix with = rows;
  with.push_back(v);
  return same_span(rows, with, ncols, p, k);
}

}  // namespace crys
