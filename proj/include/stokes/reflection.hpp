#pragma once

#include <utility>
#include <vector>

#include "stokes/common.hpp"
#include "stokes/linalg.hpp"

namespace stokes {

// Upper unitriangular matrix stored by its strictly-upper entries s_ij, i<j.
// The full matrix has unit diagonal and exact zeros below the diagonal.
class StokesMatrix {
 public:
  static int pair_count(int n) { return n * (n - 1) / 2; }

  // Packed index of the ordered pair (i,j), i<j, row-major over the upper
  // triangle: (0,1),(0,2),...,(0,n-1),(1,2),...
  int pair_index(int i, int j) const {
    require(0 <= i && i < j && j < n_, "StokesMatrix: pair must be ordered");
    return i * (2 * n_ - i - 1) / 2 + (j - i - 1);
  }

  static StokesMatrix identity(int n) {
    require(n >= 1, "StokesMatrix: dimension must be positive");
    StokesMatrix s;
    s.n_ = n;
    s.s_.assign(static_cast<size_t>(pair_count(n)), Cplx(0.0, 0.0));
    return s;
  }

  static StokesMatrix from_upper(int n, std::vector<Cplx> upper) {
    StokesMatrix s = identity(n);
    require(static_cast<int>(upper.size()) == pair_count(n),
            "StokesMatrix: upper entry count must be n(n-1)/2");
    for (const Cplx& z : upper)
      require(std::isfinite(z.real()) && std::isfinite(z.imag()),
              "StokesMatrix: entries must be finite");
    s.s_ = std::move(upper);
    return s;
  }

  // Validates the triangular structure exactly: unit diagonal, zero below.
  static StokesMatrix from_matrix(const Mat& m) {
    require_square_finite(m, "StokesMatrix");
    const int n = static_cast<int>(m.rows());
    for (int i = 0; i < n; ++i) {
      require(m(i, i) == Cplx(1.0, 0.0), "StokesMatrix: diagonal must be 1");
      for (int j = 0; j < i; ++j)
        require(m(i, j) == Cplx(0.0, 0.0),
                "StokesMatrix: lower triangle must be 0");
    }
    StokesMatrix s = identity(n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) s.s_[s.pair_index(i, j)] = m(i, j);
    return s;
  }

  int n() const { return n_; }

  Cplx s(int i, int j) const { return s_[pair_index(i, j)]; }

  void set(int i, int j, Cplx value) { s_[pair_index(i, j)] = value; }

  // Unordered access: the Gram matrix is symmetric, so s_ab = s_(min,max)
  // with no sign.
  Cplx sym(int a, int b) const {
    require(a != b, "StokesMatrix: sym needs distinct indices");
    return a < b ? s(a, b) : s(b, a);
  }

  const std::vector<Cplx>& upper() const { return s_; }

  Mat matrix() const {
    Mat m = Mat::Identity(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j) m(i, j) = s(i, j);
    return m;
  }

  // Gram matrix of the invariant bilinear form: G = (S + S^T)/2.
  Mat gram() const {
    const Mat m = matrix();
    return 0.5 * (m + m.transpose());
  }

  Cplx det_gram2() const {
    const Mat m = matrix();
    return Mat(m + m.transpose()).determinant();
  }

  bool nondegenerate(double tol = 1e-10) const {
    return std::abs(det_gram2()) > tol;
  }

  // The reflection basis exists only when S + S^T is nondegenerate.
  void require_nondegenerate(double tol = 1e-10) const {
    if (!nondegenerate(tol))
      throw DegenerateInputError(
          "StokesMatrix: det(S + S^T) vanishes within " + std::to_string(tol));
  }

 private:
  int n_ = 0;
  std::vector<Cplx> s_;
};

namespace reflection {

// Monodromy matrices of the distinguished solution basis. Each M_i is the
// identity outside row i and squares to the identity exactly.
struct ReflectionTuple {
  int n = 0;
  std::vector<Mat> M;

  void validate() const {
    require(static_cast<int>(M.size()) == n && n >= 1,
            "ReflectionTuple: need n matrices");
    for (int i = 0; i < n; ++i) {
      require_square_finite(M[i], "ReflectionTuple");
      require(static_cast<int>(M[i].rows()) == n,
              "ReflectionTuple: dimension mismatch");
      for (int r = 0; r < n; ++r) {
        if (r == i) continue;
        for (int c = 0; c < n; ++c)
          require(M[i](r, c) == (r == c ? Cplx(1.0) : Cplx(0.0)),
                  "ReflectionTuple: M_i must match the identity off row i");
      }
      const double res = max_abs(M[i] * M[i] - Mat::Identity(n, n));
      if (res > 1e-12)
        throw AccuracyError("ReflectionTuple: M_i^2 != 1", res);
    }
  }
};

// Row i of M_i is (-2g_1i, ..., -1 at i, ..., -2g_ni) with 2g_ab = s_(min,max).
inline Mat reflection_matrix(const StokesMatrix& s, int i) {
  const int n = s.n();
  require(0 <= i && i < n, "reflection_matrix: index out of range");
  Mat m = Mat::Identity(n, n);
  m(i, i) = Cplx(-1.0, 0.0);
  for (int j = 0; j < n; ++j)
    if (j != i) m(i, j) = -s.sym(i, j);
  return m;
}

inline ReflectionTuple reflections_from_stokes(const StokesMatrix& s) {
  ReflectionTuple t;
  t.n = s.n();
  t.M.reserve(static_cast<size_t>(t.n));
  for (int i = 0; i < t.n; ++i) t.M.push_back(reflection_matrix(s, i));
  return t;
}

// M_1 M_2 ... M_n in increasing index order; equals -S^{-1}S^T.
inline Mat coxeter_product(const StokesMatrix& s) {
  Mat p = reflection_matrix(s, 0);
  for (int i = 1; i < s.n(); ++i) p = p * reflection_matrix(s, i);
  return p;
}

namespace detail {

inline void check_closed_form(const char* who, Cplx closed, Cplx traced,
                              double tol) {
  const double res = std::abs(closed - traced);
  if (!(res <= tol))
    throw AccuracyError(std::string(who) +
                            ": closed form disagrees with the matrix trace",
                        res);
}

}  // namespace detail

// Tr(M_i M_j) = n - 4 + s_ij^2.
inline Cplx trace_pair(const StokesMatrix& s, int i, int j) {
  const int n = s.n();
  require(0 <= i && i < n && 0 <= j && j < n, "trace_pair: index out of range");
  require(i != j, "trace_pair: indices must differ");
  const Cplx sij = s.sym(i, j);
  const Cplx closed = Cplx(n - 4, 0.0) + sij * sij;
  const Cplx traced =
      (reflection_matrix(s, i) * reflection_matrix(s, j)).trace();
  detail::check_closed_form("trace_pair", closed, traced, 1e-12);
  return closed;
}

// Tr(M_k M_i M_j M_i) = n - 4 + (s_kj - s_ij s_ik)^2: the conjugated
// reflection M_i M_j M_i has its mirror normal to M_i(Phi_j).
inline Cplx trace_conjugated(const StokesMatrix& s, int k, int i, int j) {
  const int n = s.n();
  require(0 <= i && i < n && 0 <= j && j < n && 0 <= k && k < n,
          "trace_conjugated: index out of range");
  require(i != j && j != k && i != k,
          "trace_conjugated: indices must be pairwise distinct");
  const Cplx w = s.sym(k, j) - s.sym(i, j) * s.sym(i, k);
  const Cplx closed = Cplx(n - 4, 0.0) + w * w;
  const Mat mi = reflection_matrix(s, i);
  const Cplx traced =
      (reflection_matrix(s, k) * mi * reflection_matrix(s, j) * mi).trace();
  detail::check_closed_form("trace_conjugated", closed, traced, 1e-12);
  return closed;
}

// Quadruple trace for i<j<k<l. The factor order is pinned to the increasing
// product M_i M_j M_k M_l by the explicit 4x4 Coxeter computation: the closed
// form equals -Tr(S_ijkl^{-1} S_ijkl^T) for the principal 4x4 block.
inline Cplx trace_quadruple(const StokesMatrix& s, int i, int j, int k,
                            int l) {
  const int n = s.n();
  require(0 <= i && i < j && j < k && k < l && l < n,
          "trace_quadruple: indices must satisfy i<j<k<l");
  const Cplx sij = s.s(i, j), sik = s.s(i, k), sil = s.s(i, l);
  const Cplx sjk = s.s(j, k), sjl = s.s(j, l), skl = s.s(k, l);
  const Cplx closed = Cplx(n - 8, 0.0) + sij * sij + sik * sik + sil * sil +
                      sjk * sjk + sjl * sjl + skl * skl - sij * sik * sjk -
                      sik * sil * skl - sjk * sjl * skl - sij * sil * sjl +
                      sij * sil * sjk * skl;
  const Cplx traced = (reflection_matrix(s, i) * reflection_matrix(s, j) *
                       reflection_matrix(s, k) * reflection_matrix(s, l))
                          .trace();
  detail::check_closed_form("trace_quadruple", closed, traced, 1e-11);
  return closed;
}

// Entry-level skewsymmetric bracket {(M_i)_ab, (M_j)_cd} on the reflection
// tuple; kappa is the symbolic prefactor (i*pi in the source normalization).
inline Cplx ks_bracket_entry(const ReflectionTuple& t, int i,
                             std::pair<int, int> ab, int j,
                             std::pair<int, int> cd,
                             Cplx kappa = default_kappa()) {
  const int n = t.n;
  const auto [a, b] = ab;
  const auto [c, d] = cd;
  require(0 <= i && i < n && 0 <= j && j < n,
          "ks_bracket_entry: matrix index out of range");
  require(0 <= a && a < n && 0 <= b && b < n && 0 <= c && c < n && 0 <= d &&
              d < n,
          "ks_bracket_entry: entry index out of range");
  if (i > j) return -ks_bracket_entry(t, j, cd, i, ab, kappa);
  const Mat& mi = t.M[static_cast<size_t>(i)];
  const Mat& mj = t.M[static_cast<size_t>(j)];
  if (i == j) {
    const Mat sq = mi * mi;
    return kappa * (sq(c, b) * Cplx(a == d ? 1.0 : 0.0) -
                    sq(a, d) * Cplx(c == b ? 1.0 : 0.0));
  }
  const Mat ji = mj * mi;
  const Mat ij = mi * mj;
  return kappa * (ji(c, b) * Cplx(a == d ? 1.0 : 0.0) +
                  ij(a, d) * Cplx(c == b ? 1.0 : 0.0) - mi(c, b) * mj(a, d) -
                  mj(c, b) * mi(a, d));
}

namespace detail {

// One bracketed pair inside the trace expansion, with the products cached so
// the O(n^4) entry sweep costs only table lookups. Pairs given in decreasing
// order are routed through antisymmetry.
class EntryBracket {
 public:
  EntryBracket(const ReflectionTuple& t, int p, int q, Cplx kappa)
      : kappa_(kappa), same_(p == q), flip_(p > q) {
    const int lo = std::min(p, q), hi = std::max(p, q);
    lo_ = &t.M[static_cast<size_t>(lo)];
    hi_ = &t.M[static_cast<size_t>(hi)];
    lohi_ = (*lo_) * (*hi_);
    hilo_ = (*hi_) * (*lo_);
  }

  // {(M_p)_ab, (M_q)_cd}
  Cplx operator()(int a, int b, int c, int d) const {
    return flip_ ? -eval(c, d, a, b) : eval(a, b, c, d);
  }

 private:
  // Ordered case: the first slot holds the smaller matrix index.
  Cplx eval(int a, int b, int c, int d) const {
    if (same_)
      return kappa_ * (lohi_(c, b) * Cplx(a == d ? 1.0 : 0.0) -
                       lohi_(a, d) * Cplx(c == b ? 1.0 : 0.0));
    return kappa_ * (hilo_(c, b) * Cplx(a == d ? 1.0 : 0.0) +
                     lohi_(a, d) * Cplx(c == b ? 1.0 : 0.0) -
                     (*lo_)(c, b) * (*hi_)(a, d) -
                     (*hi_)(c, b) * (*lo_)(a, d));
  }

  Cplx kappa_;
  bool same_, flip_;
  const Mat* lo_;
  const Mat* hi_;
  Mat lohi_, hilo_;
};

}  // namespace detail

// {Tr(M_i M_k), Tr(M_j M_l)} expanded through the entry bracket by the
// Leibniz rule, summing over all repeated indices.
inline Cplx ks_trace_bracket(const StokesMatrix& s, int i, int k, int j, int l,
                             Cplx kappa = default_kappa()) {
  const int n = s.n();
  require(0 <= i && i < n && 0 <= k && k < n && 0 <= j && j < n && 0 <= l &&
              l < n,
          "ks_trace_bracket: index out of range");
  require(i != k && j != l, "ks_trace_bracket: pairs need distinct indices");
  const ReflectionTuple t = reflections_from_stokes(s);
  const Mat& mi = t.M[static_cast<size_t>(i)];
  const Mat& mk = t.M[static_cast<size_t>(k)];
  const Mat& mj = t.M[static_cast<size_t>(j)];
  const Mat& ml = t.M[static_cast<size_t>(l)];
  const detail::EntryBracket kl(t, k, l, kappa);
  const detail::EntryBracket kj(t, k, j, kappa);
  const detail::EntryBracket il(t, i, l, kappa);
  const detail::EntryBracket ij(t, i, j, kappa);
  Cplx total(0.0, 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          total += mi(a, b) * mj(c, d) * kl(b, a, d, c);
          total += mi(a, b) * ml(d, c) * kj(b, a, c, d);
          total += mk(b, a) * mj(c, d) * il(a, b, d, c);
          total += mk(b, a) * ml(d, c) * ij(a, b, c, d);
        }
  return total;
}

}  // namespace reflection
}  // namespace stokes
