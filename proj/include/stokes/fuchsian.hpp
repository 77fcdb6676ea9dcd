#pragma once

#include <vector>

#include "stokes/poisson_so.hpp"

namespace stokes::fuchsian {

// Residues of a rank-one Fuchsian system: B[i] sits at the pole u_i, B_inf
// at infinity, and sum(B) + B_inf = 0 holds exactly by construction.
struct ResidueTuple {
  std::vector<Mat> B;
  Mat B_inf;

  int n() const { return static_cast<int>(B.size()); }
  int dim() const { return static_cast<int>(B_inf.rows()); }

  void validate() const {
    require(!B.empty(), "ResidueTuple: empty");
    require_square_finite(B_inf, "ResidueTuple");
    Mat total = B_inf;
    for (const Mat& b : B) {
      require_square_finite(b, "ResidueTuple");
      require(b.rows() == B_inf.rows(), "ResidueTuple: mixed dimensions");
      total += b;
    }
    const double scale = 1.0 + max_abs(B_inf);
    require(max_abs(total) <= 1e-12 * scale,
            "ResidueTuple: residues do not sum to -B_inf");
  }
};

// B_i = -E_i(V + 1/2), B_inf = V + 1/2. Row i of B_i is the only nonzero row,
// so the sum constraint is exact entrywise.
inline ResidueTuple residues_from_V(const Mat& v) {
  so::require_skew(v, "residues_from_V");
  const int n = static_cast<int>(v.rows());
  ResidueTuple t;
  t.B_inf = v + 0.5 * Mat::Identity(n, n);
  t.B.assign(static_cast<size_t>(n), Mat::Zero(n, n));
  for (int i = 0; i < n; ++i) t.B[static_cast<size_t>(i)].row(i) = -t.B_inf.row(i);
  return t;
}

// Eigenbasis of V with unit columns; phase fixed by rotating the first
// significant component of each column to the positive real axis. Rejects
// repeated eigenvalues and ill-conditioned eigenvector systems.
inline Mat eigenbasis_of_V(const Mat& v) {
  so::require_skew(v, "eigenbasis_of_V");
  const int n = static_cast<int>(v.rows());
  auto ev = eigen(v);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(ev.values(i) - ev.values(j)) <= 1e-8 * (1.0 + max_abs(v)))
        throw DegenerateInputError("spectrum degeneracy: eigenvalues of V coincide");
  if (ev.vec_rcond < 1e-8)
    throw AccuracyError("eigenbasis of V is ill conditioned", ev.vec_rcond);
  Mat w = ev.vectors;
  for (int j = 0; j < n; ++j) {
    const double colmax = w.col(j).cwiseAbs().maxCoeff();
    for (int i = 0; i < n; ++i) {
      if (std::abs(w(i, j)) > 1e-8 * colmax) {
        w.col(j) *= std::abs(w(i, j)) / w(i, j);
        break;
      }
    }
  }
  return w;
}

// A_i = W0^{-1} B_i W0 with W0 an eigenbasis of V; A_inf = 1/2 + diag(mu) is
// diagonal up to eigen-solver accuracy (enforced at 1e-9).
inline ResidueTuple gauge_to_A(const ResidueTuple& t, const Mat& v) {
  t.validate();
  const int n = t.dim();
  require(v.rows() == n, "gauge_to_A: dimension mismatch");
  require(max_abs(Mat(t.B_inf - v - 0.5 * Mat::Identity(n, n))) <=
              1e-12 * (1.0 + max_abs(v)),
          "gauge_to_A: tuple was not built from this V");
  const Mat w = eigenbasis_of_V(v);
  const Mat winv = invert(w).inverse;
  ResidueTuple out;
  out.B.reserve(t.B.size());
  for (const Mat& b : t.B) out.B.push_back(winv * b * w);
  out.B_inf = winv * t.B_inf * w;
  const Mat off = out.B_inf - Mat(out.B_inf.diagonal().asDiagonal());
  if (max_abs(off) > 1e-9 * (1.0 + max_abs(out.B_inf)))
    throw AccuracyError("gauged residue at infinity is not diagonal", max_abs(off));
  return out;
}

// Classical Schlesinger right-hand side in u_j:
//   dA_i/du_j = [A_i, A_j]/(u_i - u_j)          (i != j)
//   dA_j/du_j = -sum_{i != j} [A_i, A_j]/(u_i - u_j)
// The diagonal entry is the negated sum of the already-computed off-diagonal
// terms, so sum_i dA_i/du_j cancels to roundoff in any summation order.
inline std::vector<Mat> schlesinger_rhs(const std::vector<Mat>& A, const Vec& u,
                                        int j) {
  const int n = static_cast<int>(A.size());
  require(u.size() == n, "schlesinger_rhs: dimension mismatch");
  require(0 <= j && j < n, "schlesinger_rhs: index out of range");
  so::require_distinct(u);
  const int d = static_cast<int>(A[0].rows());
  std::vector<Mat> out(static_cast<size_t>(n));
  Mat total = Mat::Zero(d, d);
  for (int i = 0; i < n; ++i) {
    if (i == j) continue;
    const Mat c = (A[static_cast<size_t>(i)] * A[static_cast<size_t>(j)] -
                   A[static_cast<size_t>(j)] * A[static_cast<size_t>(i)]) /
                  (u(i) - u(j));
    out[static_cast<size_t>(i)] = c;
    total += c;
  }
  out[static_cast<size_t>(j)] = -total;
  return out;
}

// --- formal linear bracket on residue entries ---------------------------------

// Coordinate function (A_res)_{ab}; 0-based everywhere.
struct GlCoord {
  int res, a, b;
  friend auto operator<=>(const GlCoord&, const GlCoord&) = default;
};
using GlTermList = std::vector<std::pair<long, GlCoord>>;

inline GlTermList gl_canonical(GlTermList t) {
  std::sort(t.begin(), t.end(),
            [](const auto& x, const auto& y) { return x.second < y.second; });
  GlTermList out;
  for (const auto& term : t) {
    if (term.first == 0) continue;
    if (!out.empty() && out.back().second == term.second)
      out.back().first += term.first;
    else
      out.push_back(term);
  }
  out.erase(std::remove_if(out.begin(), out.end(),
                           [](const auto& x) { return x.first == 0; }),
            out.end());
  return out;
}

// {(A_i)_ab, (A_j)_cd} = delta_ij (delta_ad (A_i)_cb - delta_cb (A_i)_ad);
// residues at different poles commute.
inline GlTermList gl_bracket(int dim, int i, std::pair<int, int> e1, int j,
                             std::pair<int, int> e2) {
  auto [a, b] = e1;
  auto [c, d] = e2;
  require(0 <= a && a < dim && 0 <= b && b < dim && 0 <= c && c < dim && 0 <= d &&
              d < dim,
          "gl_bracket: entry index out of range");
  require(i >= 0 && j >= 0, "gl_bracket: residue index out of range");
  GlTermList t;
  if (i != j) return t;
  if (a == d) t.push_back({+1, {i, c, b}});
  if (c == b) t.push_back({-1, {i, a, d}});
  return gl_canonical(std::move(t));
}

inline Cplx gl_eval(const GlTermList& t, const std::vector<Mat>& A) {
  Cplx acc(0.0);
  for (const auto& [coeff, c] : t)
    acc += static_cast<double>(coeff) * A[static_cast<size_t>(c.res)](c.a, c.b);
  return acc;
}

// {Tr(A_i A_k), Tr(A_j A_l)} by the chain rule over gl_bracket. Kept generic
// (no closed form) so it can serve as one side of mutual-oracle tests.
inline Cplx trace_pair_bracket(const std::vector<Mat>& A, int i, int k, int j,
                               int l) {
  const int d = static_cast<int>(A[0].rows());
  Cplx acc(0.0);
  const std::pair<int, int> fparts[2] = {{i, k}, {k, i}};
  const std::pair<int, int> gparts[2] = {{j, l}, {l, j}};
  for (auto [p, pc] : fparts)
    for (auto [q, qc] : gparts) {
      if (p != q) continue;
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          const Cplx gf = A[static_cast<size_t>(pc)](b, a);
          if (gf == Cplx(0.0)) continue;
          for (int c = 0; c < d; ++c)
            for (int e = 0; e < d; ++e) {
              const Cplx gg = A[static_cast<size_t>(qc)](e, c);
              if (gg == Cplx(0.0)) continue;
              acc += gf * gg * gl_eval(gl_bracket(d, p, {a, b}, q, {c, e}), A);
            }
        }
    }
  return acc;
}

// Hcal_j = -sum_{k != j} Tr(A_jA_k)/(u_j - u_k). For tuples built by
// residues_from_V this equals 2*H_j of the skew side: Tr(B_jB_k) = -v_jk^2
// turns the sum into +sum v_jk^2/(u_j-u_k), twice the 1/2-weighted H_j. The
// factor is forced (Hcal_j generates Schlesinger through the residue bracket,
// H_j generates the V-flow through the skew bracket), not a free convention.
inline Cplx fuchsian_hamiltonian(const std::vector<Mat>& A, const Vec& u, int j) {
  const int n = static_cast<int>(A.size());
  require(u.size() == n, "fuchsian_hamiltonian: dimension mismatch");
  require(0 <= j && j < n, "fuchsian_hamiltonian: index out of range");
  so::require_distinct(u);
  Cplx h(0.0);
  for (int k = 0; k < n; ++k)
    if (k != j)
      h -= (A[static_cast<size_t>(j)] * A[static_cast<size_t>(k)]).trace() /
           (u(j) - u(k));
  return h;
}

// Flow of Hcal_j on residue i through the formal bracket (generic chain rule;
// equals schlesinger_rhs entrywise, which is the closed form of the same
// computation).
inline Mat hamiltonian_flow(const std::vector<Mat>& A, const Vec& u, int j, int i) {
  const int n = static_cast<int>(A.size());
  require(0 <= i && i < n && 0 <= j && j < n, "hamiltonian_flow: index out of range");
  so::require_distinct(u);
  const int d = static_cast<int>(A[0].rows());
  Mat out = Mat::Zero(d, d);
  for (int k = 0; k < n; ++k) {
    if (k == j) continue;
    const Cplx coef = -1.0 / (u(j) - u(k));
    const std::pair<int, int> parts[2] = {{j, k}, {k, j}};
    for (auto [p, pc] : parts) {
      if (p != i) continue;  // bracket vanishes unless the residues match
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          const Cplx g = A[static_cast<size_t>(pc)](b, a);
          if (g == Cplx(0.0)) continue;
          for (int c = 0; c < d; ++c)
            for (int e = 0; e < d; ++e)
              out(c, e) += coef * g * gl_eval(gl_bracket(d, p, {a, b}, i, {c, e}), A);
        }
    }
  }
  return out;
}

// --- flat-connection bracket ---------------------------------------------------

// Entry functions of A(mu) = sum_i A_i/(mu - u_i) inherit the residue bracket.
// Direct double sum over residues with Cauchy kernels:
inline Cplx connection_bracket_direct(const std::vector<Mat>& A, const Vec& u,
                                      Cplx mu, Cplx nu, std::pair<int, int> e1,
                                      std::pair<int, int> e2) {
  const int n = static_cast<int>(A.size());
  auto [a, b] = e1;
  auto [c, d] = e2;
  Cplx acc(0.0);
  for (int i = 0; i < n; ++i) {
    Cplx x(0.0);
    if (a == d) x += A[static_cast<size_t>(i)](c, b);
    if (c == b) x -= A[static_cast<size_t>(i)](a, d);
    acc += x / ((mu - u(i)) * (nu - u(i)));
  }
  return acc;
}

// r-matrix form: the same bracket collapses by partial fractions to a
// difference of the connection evaluated at the two points.
inline Cplx connection_bracket_rmatrix(const std::vector<Mat>& A, const Vec& u,
                                       Cplx mu, Cplx nu, std::pair<int, int> e1,
                                       std::pair<int, int> e2) {
  const int n = static_cast<int>(A.size());
  const int dd = static_cast<int>(A[0].rows());
  auto eval = [&](Cplx z) {
    Mat m = Mat::Zero(dd, dd);
    for (int i = 0; i < n; ++i) m += A[static_cast<size_t>(i)] / (z - u(i));
    return m;
  };
  auto [a, b] = e1;
  auto [c, d] = e2;
  const Mat diff = eval(mu) - eval(nu);
  Cplx x(0.0);
  if (a == d) x += diff(c, b);
  if (c == b) x -= diff(a, d);
  return x / (nu - mu);
}

// Evaluates both routes, raises if they disagree, returns the common value.
inline Cplx connection_bracket(const std::vector<Mat>& A, const Vec& u, Cplx mu,
                               Cplx nu, std::pair<int, int> e1,
                               std::pair<int, int> e2) {
  require(static_cast<int>(A.size()) == u.size(),
          "connection_bracket: dimension mismatch");
  if (std::abs(mu - nu) <= 1e-12 * (1.0 + std::abs(mu)))
    throw DegenerateInputError("connection_bracket: coincident evaluation points");
  for (Eigen::Index i = 0; i < u.size(); ++i)
    if (std::abs(mu - u(i)) <= 1e-12 * (1.0 + std::abs(mu)) ||
        std::abs(nu - u(i)) <= 1e-12 * (1.0 + std::abs(nu)))
      throw DegenerateInputError("connection_bracket: evaluation point on a pole");
  const Cplx direct = connection_bracket_direct(A, u, mu, nu, e1, e2);
  const Cplx rmat = connection_bracket_rmatrix(A, u, mu, nu, e1, e2);
  double scale = 1.0;
  for (const Mat& m : A) scale = std::max(scale, max_abs(m));
  if (std::abs(direct - rmat) > 1e-9 * scale)
    throw AccuracyError("connection_bracket: evaluation routes disagree",
                        std::abs(direct - rmat));
  return direct;
}

}  // namespace stokes::fuchsian
