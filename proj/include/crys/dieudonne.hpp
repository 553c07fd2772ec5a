#pragma once

// Dieudonne modules over W(F_p) given by integer F and V matrices, and the
// Hom computations on both sides of the comparison
//   Hom_{W(k)[F]}(N, A_cris(C))  ~  Hom_{D_k}(N, W(C))   (V nilpotent)
//   Hom_{W(k)[F]}(N, A_cris(C))  ~  H(C)^rank             (split multiplicative)
// restricted to a finite box of exponents.

#include "crys/covec.hpp"
#include "crys/linalg.hpp"
#include "crys/multlog.hpp"

#include <chrono>
#include <climits>
#include <optional>
#include <set>

namespace crys {

/// Free W(F_p)-module of rank r with F e_j = sum_i F[i][j] e_i, likewise V.
/// `mat_prec` is the p-adic accuracy of the matrix entries (kExactFlat when
/// FV = VF = p holds over Z); `prec` is the working precision N.
struct DieudonneModule {
  int p = 2;
  int rank = 0;
  Matrix F, V;
  int prec = 1;
  int mat_prec = kExactFlat;
  std::string name;

  friend bool operator==(const DieudonneModule&, const DieudonneModule&) = default;

  Int mat_mod() const { return mat_prec == kExactFlat ? Int(0) : ppow(p, mat_prec); }

  void validate() const {
    check_prime(p);
    if (prec < 1) throw PrecisionError("DieudonneModule: precision must be >= 1");
    if (mat_prec < prec) throw PrecisionError("DieudonneModule: matrices known below the working precision");
    auto square = [&](const Matrix& m) {
      if (static_cast<int>(m.size()) != rank) return false;
      for (const auto& row : m)
        if (static_cast<int>(row.size()) != rank) return false;
      return true;
    };
    if (!square(F) || !square(V)) throw std::invalid_argument("DieudonneModule: matrix shape does not match rank");
    Int mod = mat_mod();
    Matrix pI = identity_matrix(rank);
    for (int i = 0; i < rank; ++i) pI[i][i] = p;
    pI = mat_reduce(pI, mod);
    if (mat_mul(F, V, mod) != pI || mat_mul(V, F, mod) != pI) throw DomainError("DieudonneModule: FV = VF = p fails");
  }

  DieudonneModule with_prec(int n) const {
    DieudonneModule m = *this;
    m.prec = n;
    return m;
  }
};

inline DieudonneModule scalar_module(int p, int r, int N, const Int& f, const Int& v, const std::string& name) {
  DieudonneModule m{p, r, zero_matrix(r, r), zero_matrix(r, r), N, kExactFlat, name};
  for (int i = 0; i < r; ++i) m.F[i][i] = f, m.V[i][i] = v;
  m.validate();
  return m;
}

inline DieudonneModule etale(int p, int r, int N) { return scalar_module(p, r, N, 1, p, "etale(" + std::to_string(r) + ")"); }

inline DieudonneModule multiplicative(int p, int r, int N) {
  return scalar_module(p, r, N, p, 1, "multiplicative(" + std::to_string(r) + ")");
}

/// F = V = [[0, p], [1, 0]].
inline DieudonneModule supersingular(int p, int N) {
  DieudonneModule m{p, 2, {{0, p}, {1, 0}}, {{0, p}, {1, 0}}, N, kExactFlat, "supersingular"};
  m.validate();
  return m;
}

inline DieudonneModule direct_sum(const DieudonneModule& a, const DieudonneModule& b) {
  if (a.p != b.p) throw PrimeMismatch("direct_sum: prime mismatch");
  int r = a.rank + b.rank;
  DieudonneModule m{a.p, r, zero_matrix(r, r), zero_matrix(r, r), std::min(a.prec, b.prec),
                    std::min(a.mat_prec, b.mat_prec), a.name + "+" + b.name};
  for (int i = 0; i < a.rank; ++i)
    for (int j = 0; j < a.rank; ++j) m.F[i][j] = a.F[i][j], m.V[i][j] = a.V[i][j];
  for (int i = 0; i < b.rank; ++i)
    for (int j = 0; j < b.rank; ++j) m.F[a.rank + i][a.rank + j] = b.F[i][j], m.V[a.rank + i][a.rank + j] = b.V[i][j];
  m.validate();
  return m;
}

/// V nilpotent mod p.
inline bool v_nilpotent(const DieudonneModule& m) {
  return m.rank == 0 || mat_pow(m.V, m.rank, m.p) == zero_matrix(m.rank, m.rank);
}

/// V invertible mod p.
inline bool v_invertible(const DieudonneModule& m) {
  try {
    mat_inverse(m.V, m.p, 1);
    return true;
  } catch (const DomainError&) {
    return false;
  }
}

/// N = N' + N'' with V topologically nilpotent on N' and invertible on N''.
/// Columns of Q are the new basis (N' first); matrices of the parts are
/// known mod p^K.
struct DDSplit {
  DieudonneModule nil, inv;
  Matrix Q, Qinv;
  int K = 0;
};

inline constexpr int kSplitReserve = 32;

namespace detail {

inline DieudonneModule block(const DieudonneModule& m, const Matrix& F, const Matrix& V, int lo, int hi, int K,
                             const std::string& name) {
  int r = hi - lo;
  DieudonneModule out{m.p, r, zero_matrix(r, r), zero_matrix(r, r), m.prec, K, name};
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) out.F[i][j] = F[lo + i][lo + j], out.V[i][j] = V[lo + i][lo + j];
  return out;
}

}  // namespace detail

inline DDSplit dd_split(const DieudonneModule& m) {
  m.validate();
  const int p = m.p, r = m.rank;
  const int K = m.mat_prec == kExactFlat ? m.prec + kSplitReserve : m.mat_prec;
  const Int mod = ppow(p, K);
  Matrix A = mat_pow(m.V, Int(r) * K, mod);
  // L A R = D: kernel basis from the columns of R, image basis from L^{-1}.
  SmithResult sm = smith_form(A, p, K);
  for (int v : sm.diag_val)
    if (v != 0) throw InternalError("dd_split: stable kernel or image is not a direct summand");
  const int b = static_cast<int>(sm.diag_val.size()), a = r - b;
  Matrix Linv = mat_inverse(sm.L, p, K);
  Matrix Q = zero_matrix(r, r);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < a; ++j) Q[i][j] = sm.R[i][b + j];
    for (int j = 0; j < b; ++j) Q[i][a + j] = Linv[i][j];
  }
  Matrix Qinv;
  try {
    Qinv = mat_inverse(Q, p, K);
  } catch (const DomainError&) {
    throw InternalError("dd_split: splitting is not direct");
  }
  Matrix F2 = mat_mul(mat_mul(Qinv, m.F, mod), Q, mod), V2 = mat_mul(mat_mul(Qinv, m.V, mod), Q, mod);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      if ((i < a) != (j < a) && (F2[i][j] != 0 || V2[i][j] != 0))
        throw InternalError("dd_split: F or V does not preserve the splitting");
  DDSplit s{detail::block(m, F2, V2, 0, a, K, m.name + "'"), detail::block(m, F2, V2, a, r, K, m.name + "''"), Q, Qinv,
            K};
  if (a > 0) s.nil.validate();
  if (a < r) s.inv.validate();
  return s;
}

/// Exponents whose coordinates are n/p^e in lowest terms with n <= D, e <= E.
struct Box {
  int E = 0;
  int D = 0;

  bool coordinate_ok(const PExp& a) const { return a.den_exp() <= E && a.num() <= D; }
  bool contains(const MultiExp& a) const {
    return std::all_of(a.begin(), a.end(), [&](const PExp& c) { return coordinate_ok(c); });
  }
  /// D >= p^{N+1} and E >= N+1.
  bool meets_threshold(int p, int N) const { return E >= N + 1 && Int(D) >= ppow(p, N + 1); }

  std::vector<PExp> coordinate_values(int p) const {
    std::vector<PExp> out;
    for (int e = 0; e <= E; ++e)
      for (int n = 0; n <= D; ++n)
        if (e == 0 || n % p != 0) out.emplace_back(Int(n), e, p);
    return out;
  }
  std::vector<MultiExp> enumerate(const RingDescriptor& d) const {
    std::vector<PExp> vals = coordinate_values(d.p);
    std::vector<MultiExp> out{MultiExp{}};
    for (int i = 0; i < d.nvars(); ++i) {
      std::vector<MultiExp> next;
      for (const auto& prefix : out)
        for (const auto& v : vals) {
          MultiExp e = prefix;
          e.push_back(v);
          next.push_back(std::move(e));
        }
      out = std::move(next);
    }
    return out;
  }
};

/// An orbit alpha = p^k beta of the scaling action meeting the box.
/// X chains are normalized so the largest x-coordinate of beta lies in
/// [1, p); pure-y chains by the largest y-coordinate.
struct OrbitChain {
  enum class Kind { Zero, X, PureY };
  Kind kind = Kind::Zero;
  MultiExp beta;
  std::vector<int> ks;  // ascending

  MultiExp at(int k, int p) const { return exp_scaled(beta, k, p); }
};

inline std::vector<OrbitChain> enumerate_chains(const RingDescriptor& d, const Box& box) {
  const int p = d.p;
  std::map<MultiExp, OrbitChain, ExpLess> chains(ExpLess{p});
  for (const MultiExp& a : box.enumerate(d)) {
    OrbitChain c;
    int lo = 0, hi = d.nvars();
    if (exp_is_zero(a)) {
      c.kind = OrbitChain::Kind::Zero;
    } else {
      bool has_x = false;
      for (int i = 0; i < d.nx; ++i) has_x = has_x || !a[i].is_zero();
      c.kind = has_x ? OrbitChain::Kind::X : OrbitChain::Kind::PureY;
      if (has_x) hi = d.nx;
      else lo = d.nx;
    }
    int k = 0;
    if (c.kind != OrbitChain::Kind::Zero) {
      k = INT_MIN;
      for (int i = lo; i < hi; ++i)
        if (!a[i].is_zero()) k = std::max(k, floor_log_p(a[i], p));
    }
    c.beta = exp_scaled(a, -k, p);
    auto [it, fresh] = chains.emplace(c.beta, c);
    it->second.ks.push_back(k);
  }
  std::vector<OrbitChain> out;
  for (auto& [b, c] : chains) {
    // the free parameters sit at beta; orbits whose beta leaves the box are not counted
    if (c.kind != OrbitChain::Kind::Zero && !box.contains(c.beta)) continue;
    std::sort(c.ks.begin(), c.ks.end());
    out.push_back(std::move(c));
  }
  return out;
}

/// Coordinate of a solution: the coefficient of basis vector `basis` at
/// exponent `alpha`, known modulo p^t.
struct SolutionCoord {
  int basis = 0;
  MultiExp alpha;
  int t = 0;
};

/// Solution in the A_cris parametrization: chain index and the value a(0)
/// at beta.
struct GeneratorSource {
  std::size_t chain = 0;
  Row a0;
};

/// A finite module of Hom solutions restricted to box coordinates.
/// A value v at modulus p^t is embedded in Z/p^N as v * p^{N-t}.
struct SolutionModule {
  RingDescriptor ring;
  int N = 1;
  int rank = 0;
  Box box;
  std::vector<OrbitChain> chains;
  std::vector<SolutionCoord> coords;
  Matrix generators;
  std::vector<GeneratorSource> sources;
  Matrix howell;
  std::vector<int> divisors;      // of Hom/p^N
  std::vector<int> box_divisors;  // of the span of the box rows
  bool box_ok = true;
  std::vector<std::string> warnings;

  std::size_t ncols() const { return coords.size(); }

  std::optional<std::size_t> index(int basis, const MultiExp& a) const {
    auto it = block_.find(a);
    if (it == block_.end()) return std::nullopt;
    return it->second + basis;
  }

  Row embed(const Row& g) const {
    Row out(g.size());
    for (std::size_t c = 0; c < g.size(); ++c)
      out[c] = mod_floor(g[c], ppow(ring.p, coords[c].t)) * ppow(ring.p, N - coords[c].t);
    return out;
  }
  Matrix embedded(const Matrix& rows) const {
    Matrix out;
    for (const auto& g : rows) out.push_back(embed(g));
    return out;
  }

  /// Box coordinates of a family of series (one per basis vector).
  template <class Series>
  Row read(const std::vector<Series>& u) const {
    Row out(coords.size());
    for (std::size_t c = 0; c < coords.size(); ++c)
      out[c] = mod_floor(u[coords[c].basis].coefficient(coords[c].alpha), ppow(ring.p, coords[c].t));
    return out;
  }

  void add_coords(const MultiExp& a, int t) {
    block_.emplace(a, coords.size());
    for (int i = 0; i < rank; ++i) coords.push_back({i, a, t});
  }

  /// Column range of each orbit's coordinates.
  std::vector<std::pair<std::size_t, std::size_t>> blocks;

  /// Howell form of the embedded span. Rows supported on a single orbit
  /// block are reduced blockwise, which gives the same canonical form.
  Matrix canonical(const Matrix& rows) const {
    Matrix e = embedded(rows);
    auto parts = split(e);
    if (!parts) return howell_form(e, ncols(), ring.p, N);
    Matrix out;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      auto [lo, hi] = blocks[b];
      for (const Row& h : howell_form((*parts)[b], hi - lo, ring.p, N)) {
        Row full(ncols(), Int(0));
        std::copy(h.begin(), h.end(), full.begin() + lo);
        out.push_back(std::move(full));
      }
    }
    return out;
  }
  std::vector<int> invariants(const Matrix& rows) const {
    Matrix e = embedded(rows);
    auto parts = split(e);
    if (!parts) return span_invariants(e, ncols(), ring.p, N);
    std::vector<int> out;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      auto v = span_invariants((*parts)[b], blocks[b].second - blocks[b].first, ring.p, N);
      out.insert(out.end(), v.begin(), v.end());
    }
    std::sort(out.rbegin(), out.rend());
    return out;
  }

  void finalize() {
    howell = canonical(generators);
    box_divisors = invariants(generators);
    divisors = box_divisors;
  }

  bool same_span_as(const Matrix& rows) const { return canonical(rows) == howell; }

 private:
  std::map<MultiExp, std::size_t, ExpLess> block_{ExpLess{2}};

  std::optional<std::vector<Matrix>> split(const Matrix& e) const {
    std::vector<Matrix> parts(blocks.size());
    for (const Row& g : e) {
      std::optional<std::size_t> home;
      for (std::size_t b = 0; b < blocks.size(); ++b)
        for (std::size_t c = blocks[b].first; c < blocks[b].second; ++c)
          if (g[c] != 0) {
            if (home && *home != b) return std::nullopt;
            home = b;
            break;
          }
      if (home) parts[*home].emplace_back(g.begin() + blocks[*home].first, g.begin() + blocks[*home].second);
    }
    return parts;
  }

 public:
  void reset_index() { block_ = std::map<MultiExp, std::size_t, ExpLess>(ExpLess{ring.p}); }
};

namespace detail {

inline SolutionModule solution_frame(const DieudonneModule& m, const RingDescriptor& d, const Box& box, bool witt_side) {
  m.validate();
  if (d.p != m.p) throw PrimeMismatch("Hom solver: module and ring over different primes");
  SolutionModule s;
  s.ring = d.with_prec(m.prec);
  s.N = m.prec;
  s.rank = m.rank;
  s.box = box;
  s.reset_index();
  s.chains = enumerate_chains(d, box);
  for (const auto& c : s.chains) {
    std::size_t lo = s.ncols();
    for (int k : c.ks) {
      MultiExp a = c.at(k, d.p);
      int t = m.prec;
      if (witt_side) t = std::min(t, witt_quotient_depth(a, d.nx, d.p));
      if (t > 0) s.add_coords(a, t);
    }
    if (s.ncols() > lo) s.blocks.emplace_back(lo, s.ncols());
  }
  if (!box.meets_threshold(d.p, m.prec)) {
    s.box_ok = false;
    s.warnings.push_back("box below threshold: need E >= " + std::to_string(m.prec + 1) + " and D >= " +
                         ppow(d.p, m.prec + 1).str());
  }
  return s;
}

inline int fixed_vector_prec(const DieudonneModule& m) {
  return m.mat_prec == kExactFlat ? m.prec + kSplitReserve : std::min(m.mat_prec, m.prec + kSplitReserve);
}

/// Generators of {c : M c = c} mod p^N, solved at the extra precision and
/// projected.
inline Matrix fixed_vectors(const Matrix& M, int p, int N, int P) {
  const int r = static_cast<int>(M.size());
  const Int mod = ppow(p, P);
  Matrix A = mat_reduce(M, mod);
  for (int i = 0; i < r; ++i) A[i][i] -= 1;
  Matrix out;
  for (auto row : kernel_mod(mat_reduce(A, mod), r, p, P)) {
    for (auto& v : row) v = mod_floor(v, ppow(p, N));
    if (!is_zero_row(row)) out.push_back(std::move(row));
  }
  return howell_form(out, r, p, N);
}

}  // namespace detail

/// Value a(k) at p^k beta of the A_cris solution with a(0) = a0:
/// a(k) = (F^T)^{-k} a0 for k < 0, p^{sum_{l<k} sigma_l - k} (V^T)^k a0 for k >= 0.
inline Row sw_chain_value(const DieudonneModule& m, const RingDescriptor& d, const OrbitChain& c, const Row& a0, int k) {
  const int p = m.p, N = m.prec;
  const Int mod = ppow(p, N);
  if (c.kind != OrbitChain::Kind::X) return k == 0 && c.kind == OrbitChain::Kind::Zero ? a0 : Row(m.rank, Int(0));
  Matrix Ft = mat_reduce(mat_transpose(m.F), mod), Vt = mat_reduce(mat_transpose(m.V), mod);
  if (k < 0) return mat_vec(mat_pow(Ft, -k, mod), a0, mod);
  long e = -k;
  for (int l = 0; l < k; ++l) e += floor_sum(c.at(l, p), d.nx, p);
  if (e >= N) return Row(m.rank, Int(0));
  Row v = mat_vec(mat_pow(Vt, k, mod), a0, mod);
  for (auto& x : v) x = mod_floor(x * ppow(p, static_cast<int>(e)), mod);
  return v;
}

/// Hom_{W(k)[F]}(N, A_cris(C)) mod p^N on the box coordinates.
inline SolutionModule solve_sw(const DieudonneModule& m, const RingDescriptor& d, const Box& box) {
  SolutionModule s = detail::solution_frame(m, d, box, false);
  const int p = m.p, N = m.prec, r = m.rank;
  const Int mod = ppow(p, N);
  Matrix Ft = mat_reduce(mat_transpose(m.F), mod);
  // a(0) must make the orbit tail (F^T)^n a(0) tend to zero.
  Matrix L = kernel_mod(mat_pow(Ft, Int(r) * N, mod), r, p, N);
  Matrix fixed = detail::fixed_vectors(mat_transpose(m.F), p, N, detail::fixed_vector_prec(m));
  for (std::size_t ci = 0; ci < s.chains.size(); ++ci) {
    const OrbitChain& c = s.chains[ci];
    // Pure-y orbits carry no solutions: the relation a(k) = F^T a(k+1) holds
    // at every k, and decay in both directions forces a = 0.
    if (c.kind == OrbitChain::Kind::PureY) continue;
    for (const Row& a0 : c.kind == OrbitChain::Kind::Zero ? fixed : L) {
      Row g(s.ncols(), Int(0));
      for (int k : c.ks) {
        Row v = sw_chain_value(m, d, c, a0, k);
        auto base = s.index(0, c.at(k, p));
        for (int i = 0; i < r; ++i) g[*base + i] = v[i];
      }
      s.generators.push_back(std::move(g));
      s.sources.push_back({ci, a0});
    }
  }
  s.finalize();
  return s;
}

/// The full A_cris solution (every orbit position, not just the box) for a
/// generator source, one series per basis vector.
inline std::vector<DividedSeries> sw_series(const DieudonneModule& m, const SolutionModule& s, const GeneratorSource& g) {
  const RingDescriptor& d = s.ring;
  const int p = d.p, N = m.prec, r = m.rank;
  const OrbitChain& c = s.chains[g.chain];
  std::vector<DividedSeries> u(r, DividedSeries(d, N));
  auto put = [&](int k) {
    Row v = sw_chain_value(m, d, c, g.a0, k);
    for (int i = 0; i < r; ++i) u[i].add_term(c.at(k, p), v[i]);
    return !is_zero_row(v);
  };
  if (c.kind != OrbitChain::Kind::X) {
    put(0);
    return u;
  }
  for (int k = 0; k > -r * N - 1; --k) put(k);
  for (int k = 1;; ++k) {
    long e = -k;
    for (int l = 0; l < k; ++l) e += floor_sum(c.at(l, p), d.nx, p);
    if (e >= N) break;
    put(k);
  }
  return u;
}

/// F(u_j) = sum_i F[i][j] u_i.
inline bool f_equivariant(const DieudonneModule& m, const std::vector<DividedSeries>& u) {
  for (int j = 0; j < m.rank; ++j) {
    DividedSeries rhs(u[j].desc(), u[j].prec());
    for (int i = 0; i < m.rank; ++i) rhs = rhs + u[i].scaled(m.F[i][j]);
    if (!(frobF(u[j]) == rhs)) return false;
  }
  return true;
}

/// Solutions of the W(C)-side equations along one orbit, at precision P.
/// X chains: row layout is level j = 1..levels (exponent beta/p^j), basis i
/// at column (j-1)*rank + i, value modulo p^{min(j,P)}. Zero chain: rank
/// columns modulo p^P.
struct ChainKernel {
  int levels = 0;
  int P = 0;
  Matrix rows;
};

inline ChainKernel classical_chain_kernel(const DieudonneModule& m, const OrbitChain& c, int P) {
  const int p = m.p, r = m.rank;
  if (P > m.mat_prec) throw PrecisionError("solve_classical: matrices known below the solving precision");
  const Int mod = ppow(p, P);
  Matrix Ft = mat_reduce(mat_transpose(m.F), mod), Vt = mat_reduce(mat_transpose(m.V), mod);
  ChainKernel out;
  out.P = P;
  if (c.kind == OrbitChain::Kind::PureY) return out;
  if (c.kind == OrbitChain::Kind::Zero) {
    Matrix A;
    for (int i = 0; i < r; ++i) {
      Row f(r), v(r);
      for (int l = 0; l < r; ++l) f[l] = Ft[i][l] - (i == l), v[l] = Vt[i][l] - (i == l ? p : 0);
      A.push_back(f);
      A.push_back(v);
    }
    out.rows = kernel_mod(mat_reduce(A, mod), r, p, P);
    return out;
  }
  // Finite support: B_j for j >= P lies in the part where F^T is nilpotent
  // mod p, so B_j = 0 past P + r P.
  const int J = (r + 1) * P + 1;
  out.levels = J;
  const std::size_t n = static_cast<std::size_t>(J) * r;
  auto col = [&](int j, int i) { return static_cast<std::size_t>(j - 1) * r + i; };
  Matrix A;
  for (int j = 1; j <= J; ++j) {
    const int t = std::min(j, P);
    const Int scale = ppow(p, P - t);
    for (int i = 0; i < r; ++i) {
      Row f(n, Int(0)), v(n, Int(0));
      // F: B_{j+1} = F^T B_j mod p^t
      if (j < J) f[col(j + 1, i)] += 1;
      for (int l = 0; l < r; ++l) f[col(j, l)] -= Ft[i][l];
      // V: p B_{j-1} = V^T B_j mod p^t
      for (int l = 0; l < r; ++l) v[col(j, l)] += Vt[i][l];
      if (j > 1) v[col(j - 1, i)] -= p;
      for (auto* e : {&f, &v}) {
        for (auto& x : *e) x = mod_floor(x * scale, mod);
        A.push_back(std::move(*e));
      }
    }
  }
  for (auto row : kernel_mod(A, n, p, P)) {
    for (int j = 1; j <= J; ++j)
      for (int i = 0; i < r; ++i) row[col(j, i)] = mod_floor(row[col(j, i)], ppow(p, std::min(j, P)));
    if (!is_zero_row(row)) out.rows.push_back(std::move(row));
  }
  return out;
}

namespace detail {

inline Matrix project_classical(const SolutionModule& s, const OrbitChain& c, const ChainKernel& ker, int r) {
  const int p = s.ring.p;
  Matrix out;
  for (const Row& row : ker.rows) {
    Row g(s.ncols(), Int(0));
    for (int k : c.ks) {
      auto base = s.index(0, c.at(k, p));
      if (!base) continue;
      for (int i = 0; i < r; ++i) {
        const SolutionCoord& sc = s.coords[*base + i];
        Int v = c.kind == OrbitChain::Kind::Zero ? row[i] : row[static_cast<std::size_t>(-k - 1) * r + i];
        g[*base + i] = mod_floor(v, ppow(p, sc.t));
      }
    }
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace detail

/// Least m with V^{n+m} N in p^n N, i.e. V^m N in F^n N.
inline int lift_exponent(const DieudonneModule& m, int n) {
  if (!v_nilpotent(m)) throw DomainError("lift_exponent: V is not nilpotent mod p");
  const Int mod = ppow(m.p, n);
  for (int k = 0; k <= m.rank * n; ++k)
    if (mat_pow(m.V, n + k, mod) == zero_matrix(m.rank, m.rank)) return k;
  throw InternalError("lift_exponent: no valid m");
}

namespace detail {

inline int levels_for(int r, int Q) { return (r + 1) * Q + 1; }

/// Elementary divisors of Hom/p^N along one orbit from solution values on
/// every level, level j known modulo p^{min(j,Q)}. W(C)/p^N coordinates do
/// not separate Hom/p^N; the headroom Q - N (the lift exponent) does.
inline std::vector<int> level_divisors(const OrbitChain& c, const Matrix& rows, int r, int p, int Q, int N) {
  const bool zero = c.kind == OrbitChain::Kind::Zero;
  const int L = zero ? 1 : levels_for(r, Q);
  Matrix e;
  for (const Row& g : rows) {
    Row h(static_cast<std::size_t>(L) * r);
    for (int j = 1; j <= L; ++j) {
      const int t = zero ? Q : std::min(j, Q);
      for (int i = 0; i < r; ++i) {
        std::size_t k = static_cast<std::size_t>(j - 1) * r + i;
        h[k] = mod_floor(g[k], ppow(p, t)) * ppow(p, Q - t);
      }
    }
    e.push_back(std::move(h));
  }
  std::vector<int> out;
  for (int v : span_invariants(e, static_cast<std::size_t>(L) * r, p, Q)) out.push_back(std::min(v, N));
  return out;
}

inline int wc_headroom(const DieudonneModule& m) { return v_nilpotent(m) ? lift_exponent(m, m.prec) : 0; }

inline void set_level_divisors(SolutionModule& s, std::vector<int> div) {
  std::sort(div.rbegin(), div.rend());
  s.divisors = std::move(div);
}

}  // namespace detail

inline constexpr int kMaxSpare = 8;

/// Hom_{D_k}(N, W(C)) mod p^N on the orbits meeting the box, for V nilpotent
/// mod p. Each orbit is solved at precision N + m + spare; the spare
/// precision grows until the box projection and the divisors are stable.
inline SolutionModule solve_classical(const DieudonneModule& m, const RingDescriptor& d, const Box& box) {
  if (!v_nilpotent(m))
    throw DomainError("solve_classical: V is not nilpotent mod p; split the module and use the unit solver");
  SolutionModule s = detail::solution_frame(m, d, box, true);
  const int N = m.prec, Q = N + detail::wc_headroom(m);
  std::vector<int> div;
  for (const OrbitChain& c : s.chains) {
    if (c.kind == OrbitChain::Kind::PureY) continue;
    std::optional<Matrix> prev;
    std::vector<int> prev_div;
    bool stable = false;
    for (int spare = 1; spare <= kMaxSpare && Q + spare <= m.mat_prec; ++spare) {
      ChainKernel ker = classical_chain_kernel(m, c, Q + spare);
      Matrix cur = detail::project_classical(s, c, ker, m.rank);
      std::vector<int> cur_div = detail::level_divisors(c, ker.rows, m.rank, d.p, Q, N);
      if (prev && cur_div == prev_div && s.canonical(*prev) == s.canonical(cur)) {
        stable = true;
        break;
      }
      prev = std::move(cur);
      prev_div = std::move(cur_div);
    }
    if (!stable) throw InternalError("solve_classical: projection did not stabilize");
    for (auto& g : *prev) s.generators.push_back(std::move(g));
    div.insert(div.end(), prev_div.begin(), prev_div.end());
  }
  s.finalize();
  detail::set_level_divisors(s, std::move(div));
  return s;
}

/// beta applied to every A_cris generator (its full orbit series), read on
/// the W(C) coordinates of the same box. The divisors of the image come from
/// the same solutions at precision N + m, read on every level.
inline SolutionModule beta_pushforward(const DieudonneModule& m, const SolutionModule& sw) {
  SolutionModule out = detail::solution_frame(m, sw.ring, sw.box, true);
  out.box_ok = sw.box_ok;
  out.warnings = sw.warnings;
  for (const auto& g : sw.sources) {
    std::vector<WittSeries> w;
    for (const auto& u : sw_series(m, sw, g)) w.push_back(beta(u).series());
    out.generators.push_back(out.read(w));
  }
  out.finalize();

  const int N = m.prec, Q = N + detail::wc_headroom(m), r = m.rank, p = m.p;
  const DieudonneModule mq = m.with_prec(Q);
  SolutionModule swq = solve_sw(mq, sw.ring, sw.box);
  std::vector<Matrix> per_chain(swq.chains.size());
  for (const auto& g : swq.sources) {
    const OrbitChain& c = swq.chains[g.chain];
    const bool zero = c.kind == OrbitChain::Kind::Zero;
    const int L = zero ? 1 : detail::levels_for(r, Q);
    std::vector<WittSeries> w;
    for (const auto& u : sw_series(mq, swq, g)) w.push_back(beta(u).series());
    Row row(static_cast<std::size_t>(L) * r);
    for (int j = 1; j <= L; ++j)
      for (int i = 0; i < r; ++i) row[static_cast<std::size_t>(j - 1) * r + i] = w[i].coefficient(zero ? c.beta : c.at(-j, p));
    per_chain[g.chain].push_back(std::move(row));
  }
  std::vector<int> div;
  for (std::size_t ci = 0; ci < per_chain.size(); ++ci) {
    auto v = detail::level_divisors(swq.chains[ci], per_chain[ci], r, p, Q, N);
    div.insert(div.end(), v.begin(), v.end());
  }
  detail::set_level_divisors(out, std::move(div));
  return out;
}

/// Representatives in W(C^flat) of one classical solution, per basis vector,
/// at the kernel precision.
inline std::vector<WittSeries> classical_series(const DieudonneModule& m, const RingDescriptor& d, const OrbitChain& c,
                                                const ChainKernel& ker, const Row& row) {
  const int r = m.rank;
  std::vector<WittSeries> w(r, WittSeries(d, ker.P));
  if (c.kind == OrbitChain::Kind::Zero) {
    for (int i = 0; i < r; ++i) w[i].add_term(zero_exp(d), row[i]);
  } else if (c.kind == OrbitChain::Kind::X) {
    for (int j = 1; j <= ker.levels; ++j)
      for (int i = 0; i < r; ++i) w[i].add_term(c.at(-j, d.p), row[static_cast<std::size_t>(j - 1) * r + i]);
  }
  return w;
}

/// x -> V^{-m} F^n alpha(F^{-n} V^m x) on the basis, with n = N. `w` holds
/// representatives of alpha(e_l) at precision at least N + m. Returns the
/// images of e_i in M(C) at precision N.
inline std::vector<VExpansion> lift_to_M(const DieudonneModule& m, const std::vector<WittSeries>& w, int mm = -1) {
  const int p = m.p, N = m.prec, n = N, r = m.rank;
  if (mm < 0) mm = lift_exponent(m, n);
  if (mm > m.rank * n || mat_pow(m.V, n + mm, ppow(p, n)) != zero_matrix(r, r))
    throw DomainError("lift_to_M: V^m N is not contained in F^n N");
  const int P = N + mm;
  if (P > m.mat_prec - n) throw PrecisionError("lift_to_M: matrices known below the lifting precision");
  for (const auto& x : w)
    if (x.prec() < P) throw PrecisionError("lift_to_M: solution known below precision N + m");
  // F^{-n} V^m e_i = V^{n+m} e_i / p^n
  Matrix Vn = mat_pow(m.V, n + mm, ppow(p, n + P));
  std::vector<VExpansion> out;
  for (int i = 0; i < r; ++i) {
    WittSeries y(w[0].desc(), P);
    for (int l = 0; l < r; ++l) y = y + w[l].with_prec(P).scaled(Vn[l][i] / ppow(p, n));
    out.push_back(to_expansion(PFraction{mm, y.frob_pow(n + mm)}));
  }
  return out;
}

/// Generators of `big` read on the coordinates of `small` (same ring and N).
inline Matrix restrict_rows(const SolutionModule& big, const SolutionModule& small) {
  Matrix out;
  for (const Row& g : big.generators) {
    Row h(small.ncols(), Int(0));
    for (std::size_t c = 0; c < small.ncols(); ++c) {
      const SolutionCoord& sc = small.coords[c];
      auto j = big.index(sc.basis, sc.alpha);
      if (!j) throw std::invalid_argument("restrict_rows: coordinate outside the larger box");
      h[c] = mod_floor(g[*j], ppow(small.ring.p, sc.t));
    }
    out.push_back(std::move(h));
  }
  return out;
}

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct InstanceReport {
  std::string module;
  bool pass = true;
  std::vector<int> sw_divisors;
  std::vector<int> independent_divisors;
  std::vector<CheckResult> checks;
  double seconds = 0;

  void add(std::string name, bool ok, std::string detail = {}) {
    pass = pass && ok;
    checks.push_back({std::move(name), ok, std::move(detail)});
  }
};

struct TheoremReport {
  int p = 2;
  int N = 1;
  Box box, enlarged;
  bool pass = true;
  std::vector<InstanceReport> instances;
};

inline std::vector<DieudonneModule> default_suite(int p, int N) {
  return {etale(p, 1, N), multiplicative(p, 1, N), supersingular(p, N),
          direct_sum(etale(p, 1, N), multiplicative(p, 1, N))};
}

namespace detail {

inline std::string divisors_string(const std::vector<int>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + "]";
}

inline std::string row_string(const Row& r) {
  std::string s = "(";
  for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + r[i].str();
  return s + ")";
}

/// First generator of `rows` outside the span of `s`, for failure reports.
inline std::string span_witness(const SolutionModule& s, const Matrix& rows) {
  for (const Row& g : rows) {
    Matrix with = s.generators;
    with.push_back(g);
    if (s.canonical(with) != s.howell) return "generator " + row_string(g) + " not in span";
  }
  Matrix mine = s.canonical(rows);
  for (const Row& g : s.generators) {
    Matrix with = rows;
    with.push_back(g);
    if (s.canonical(with) != mine) return "span misses " + row_string(g);
  }
  return {};
}

inline void compare_spans(InstanceReport& rep, const std::string& name, const SolutionModule& ref, const Matrix& rows) {
  auto div = ref.invariants(rows);
  bool ok = ref.same_span_as(rows) && div == ref.box_divisors;
  rep.add(name, ok, ok ? divisors_string(div) : span_witness(ref, rows) + "; divisors " + divisors_string(div) + " vs " +
                                                  divisors_string(ref.box_divisors));
}

/// The same Hom module in the basis Q: a'(alpha) = Q^T a(alpha).
inline Matrix change_basis(const SolutionModule& s, const Matrix& Q) {
  const Int mod = ppow(s.ring.p, s.N);
  Matrix Qt = mat_reduce(mat_transpose(Q), mod), out;
  for (const Row& g : s.generators) {
    Row h(g.size());
    for (std::size_t b = 0; b < s.ncols(); b += s.rank) {
      Row a(g.begin() + b, g.begin() + b + s.rank);
      Row v = mat_vec(Qt, a, mod);
      std::copy(v.begin(), v.end(), h.begin() + b);
    }
    out.push_back(std::move(h));
  }
  return out;
}

inline bool split_multiplicative(const DieudonneModule& m) {
  const Int mod = ppow(m.p, m.prec);
  Matrix I = identity_matrix(m.rank), pI = I;
  for (int i = 0; i < m.rank; ++i) pI[i][i] = m.p;
  return mat_reduce(m.V, mod) == mat_reduce(I, mod) && mat_reduce(m.F, mod) == mat_reduce(pI, mod);
}

}  // namespace detail

namespace detail {

/// V nilpotent part: beta pushforward against the classical solver, and the
/// lift V^{-m} F^n alpha F^{-n} V^m back through f.
inline std::vector<int> check_pronilpotent(InstanceReport& rep, const DieudonneModule& m, const RingDescriptor& d, const Box& box,
                               const Box& enlarged) {
  const int N = m.prec;
  SolutionModule sw = solve_sw(m, d, box);
  SolutionModule cl = solve_classical(m, d, box);
  SolutionModule bp = beta_pushforward(m, sw);
  compare_spans(rep, "beta_pushforward_equals_classical", cl, bp.generators);

  const int mm = lift_exponent(m, N);
  Matrix lifted;
  bool epi = true, m_independent = true;
  for (const OrbitChain& c : sw.chains) {
    ChainKernel ker = classical_chain_kernel(m, c, N + mm + 3);
    for (const Row& row : ker.rows) {
      auto w = classical_series(m, d, c, ker, row);
      auto x = lift_to_M(m, w, mm);
      auto x1 = lift_to_M(m, w, mm + 1);
      std::vector<DividedSeries> u;
      for (int i = 0; i < m.rank; ++i) {
        epi = epi && canonical_epi(x[i]) == WCElement(w[i].with_prec(N));
        m_independent = m_independent && equal_mod_pN(to_fraction(x[i]), to_fraction(x1[i]));
        u.push_back(f_map(x[i]));
      }
      lifted.push_back(sw.read(u));
    }
  }
  rep.add("lift_recovers_classical", epi);
  rep.add("lift_independent_of_m", m_independent);
  compare_spans(rep, "f_of_lift_equals_sw", sw, lifted);

  SolutionModule big = solve_classical(m, d, enlarged);
  compare_spans(rep, "classical_box_stable", cl, restrict_rows(big, cl));
  rep.add("beta_pushforward_divisors", bp.divisors == cl.divisors,
          divisors_string(bp.divisors) + " vs " + divisors_string(cl.divisors));
  return cl.divisors;
}

/// Split multiplicative part: log of Artin-Hasse units against the A_cris
/// solutions, and solve_units / log round trips.
inline std::vector<int> check_multiplicative(InstanceReport& rep, const DieudonneModule& m, const RingDescriptor& d,
                                 const Box& box) {
  const int N = m.prec, p = d.p;
  SolutionModule sw = solve_sw(m, d, box);
  if (!split_multiplicative(m)) {
    rep.add("multiplicative_part_split", false, "V is not the identity mod p^N in the split basis");
    return {};
  }
  Matrix logs;
  bool units_round_trip = true;
  for (const OrbitChain& c : sw.chains) {
    if (c.kind != OrbitChain::Kind::X) continue;
    UnitElement unit = artin_hasse_unit(TiltPoly::monomial(d, c.beta), N);
    DividedSeries l = log_teich(unit, N);
    units_round_trip = units_round_trip && solve_units(l) == unit;
    for (int i = 0; i < m.rank; ++i) {
      std::vector<DividedSeries> u(m.rank, DividedSeries(d, N));
      u[i] = l;
      logs.push_back(sw.read(u));
    }
  }
  compare_spans(rep, "log_units_equals_sw", sw, logs);
  bool logs_round_trip = true;
  for (const auto& g : sw.sources)
    for (const DividedSeries& u : sw_series(m, sw, g))
      logs_round_trip = logs_round_trip && log_teich(solve_units(u), N) == u;
  rep.add("units_log_round_trip", units_round_trip);
  rep.add("log_units_round_trip", logs_round_trip);
  return sw.invariants(logs);
}

}  // namespace detail

inline InstanceReport verify_instance(const DieudonneModule& m, const RingDescriptor& d, const Box& box,
                                      const Box& enlarged) {
  m.validate();
  if (!box.meets_threshold(m.p, m.prec) || !enlarged.meets_threshold(m.p, m.prec))
    throw PrecisionError("verify_theorem: box below threshold");
  InstanceReport rep;
  rep.module = m.name;
  const RingDescriptor dn = d.with_prec(m.prec);
  SolutionModule sw = solve_sw(m, dn, box);
  rep.sw_divisors = sw.divisors;

  bool equivariant = true;
  for (const auto& g : sw.sources) equivariant = equivariant && f_equivariant(m, sw_series(m, sw, g));
  rep.add("sw_f_equivariant", equivariant);
  SolutionModule big = solve_sw(m, dn, enlarged);
  detail::compare_spans(rep, "sw_box_stable", sw, restrict_rows(big, sw));

  DDSplit split = dd_split(m);
  std::vector<int> indep;
  if (split.nil.rank > 0 && split.inv.rank > 0) {
    SolutionModule parts = solve_sw(direct_sum(split.nil, split.inv), dn, box);
    detail::compare_spans(rep, "sw_respects_splitting", parts, detail::change_basis(sw, split.Q));
  }
  auto append = [&](const std::vector<int>& v) { indep.insert(indep.end(), v.begin(), v.end()); };
  if (split.nil.rank > 0) append(detail::check_pronilpotent(rep, split.nil, dn, box, enlarged));
  if (split.inv.rank > 0) append(detail::check_multiplicative(rep, split.inv, dn, box));
  std::sort(indep.rbegin(), indep.rend());
  rep.independent_divisors = indep;
  rep.add("divisors_match", indep == rep.sw_divisors,
          detail::divisors_string(rep.sw_divisors) + " vs " + detail::divisors_string(indep));
  return rep;
}

inline TheoremReport verify_theorem(const std::vector<DieudonneModule>& suite, const RingDescriptor& d, const Box& box) {
  TheoremReport rep;
  rep.p = d.p;
  rep.N = suite.empty() ? d.prec : suite.front().prec;
  rep.box = box;
  rep.enlarged = Box{box.E + 1, box.D * d.p};
  for (const auto& m : suite) {
    m.validate();
    if (m.p != d.p) throw PrimeMismatch("verify_theorem: module over a different prime");
  }
  for (const auto& m : suite) {
    auto t0 = std::chrono::steady_clock::now();
    rep.instances.push_back(verify_instance(m, d, box, rep.enlarged));
    rep.instances.back().seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep.pass = rep.pass && rep.instances.back().pass;
  }
  return rep;
}

}  // namespace crys
