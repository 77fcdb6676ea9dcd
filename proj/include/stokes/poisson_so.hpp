#pragma once

#include <map>
#include <utility>
#include <vector>

#include "stokes/linalg.hpp"

namespace stokes::so {

// Strictly-upper coordinate label (i, j), 0-based, i < j. Entries below the
// diagonal are always rewritten as -v_(j,i) before anything is stored.
using Coord = std::pair<int, int>;

inline void require_coord(Coord c, int n) {
  require(0 <= c.first && c.first < c.second && c.second < n,
          "coordinate pair must satisfy 0 <= i < j < n");
}

inline std::vector<Coord> coords(int n) {
  std::vector<Coord> out;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out.push_back({i, j});
  return out;
}

// Skew-symmetry is enforced by construction everywhere: matrices are built
// from strictly-upper entries, so V^T = -V holds exactly in floating point.
inline Mat skew_from_upper(int n, const std::vector<Cplx>& upper) {
  require(static_cast<int>(upper.size()) == n * (n - 1) / 2,
          "skew_from_upper: wrong number of entries");
  Mat v = Mat::Zero(n, n);
  size_t k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j, ++k) {
      v(i, j) = upper[k];
      v(j, i) = -upper[k];
    }
  return v;
}

inline std::vector<Cplx> upper_of(const Mat& v) {
  const int n = static_cast<int>(v.rows());
  std::vector<Cplx> out;
  out.reserve(static_cast<size_t>(n * (n - 1) / 2));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out.push_back(v(i, j));
  return out;
}

inline void require_skew(const Mat& v, const char* who = "skew") {
  require_square_finite(v, who);
  const int n = static_cast<int>(v.rows());
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      require(v(j, i) == -v(i, j), std::string(who) + ": V^T = -V violated");
}

// --- formal linear bracket ---------------------------------------------------

// Integer combination of coordinate functions, canonicalized: sorted by
// coordinate, merged, zero terms dropped. Exact arithmetic end to end, which
// is what makes the antisymmetry/Jacobi checks cancellation tests instead of
// tolerance tests.
using TermList = std::vector<std::pair<long, Coord>>;

inline void add_term(TermList& acc, long coeff, int a, int b) {
  if (a == b || coeff == 0) return;
  if (a > b) {
    std::swap(a, b);
    coeff = -coeff;
  }
  acc.push_back({coeff, {a, b}});
}

inline TermList canonical(TermList t) {
  std::sort(t.begin(), t.end(),
            [](const auto& x, const auto& y) { return x.second < y.second; });
  TermList out;
  for (const auto& term : t) {
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

// {v_ab, v_cd} = v_ad d_bc + v_bc d_ad - v_bd d_ac - v_ac d_bd
inline TermList so_bracket(int n, Coord p, Coord q) {
  require_coord(p, n);
  require_coord(q, n);
  const int a = p.first, b = p.second, c = q.first, d = q.second;
  TermList t;
  if (b == c) add_term(t, +1, a, d);
  if (a == d) add_term(t, +1, b, c);
  if (a == c) add_term(t, -1, b, d);
  if (b == d) add_term(t, -1, a, c);
  return canonical(std::move(t));
}

inline Cplx eval_terms(const TermList& t, const Mat& v) {
  Cplx acc(0.0);
  for (const auto& [coeff, c] : t)
    acc += static_cast<double>(coeff) * v(c.first, c.second);
  return acc;
}

inline Cplx so_bracket_eval(const Mat& v, Coord p, Coord q) {
  return eval_terms(so_bracket(static_cast<int>(v.rows()), p, q), v);
}

// Formal {{v_p, v_q}, v_r}; feeding the cyclic sum through canonical() must
// return the empty list.
inline TermList so_bracket_nested(int n, Coord p, Coord q, Coord r) {
  TermList inner = so_bracket(n, p, q);
  TermList out;
  for (const auto& [coeff, c] : inner)
    for (const auto& [coeff2, c2] : so_bracket(n, c, r))
      add_term(out, coeff * coeff2, c2.first, c2.second);
  return canonical(std::move(out));
}

// Poisson tensor evaluated at V over the coordinate list, P[r][s] = {v_r, v_s}(V).
inline Mat so_tensor(const Mat& v) {
  const int n = static_cast<int>(v.rows());
  const auto cs = coords(n);
  const int m = static_cast<int>(cs.size());
  Mat p(m, m);
  for (int r = 0; r < m; ++r)
    for (int s = 0; s < m; ++s)
      p(r, s) = so_bracket_eval(v, cs[static_cast<size_t>(r)], cs[static_cast<size_t>(s)]);
  return p;
}

// --- deformation parameters --------------------------------------------------

inline double tol_distinct(const Vec& u) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) m = std::max(m, std::abs(u(i)));
  return 1e-8 * m;
}

inline double max_gap(const Vec& u) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i)
    for (Eigen::Index j = i + 1; j < u.size(); ++j)
      m = std::max(m, std::abs(u(i) - u(j)));
  return m;
}

inline double tol_admissible(const Vec& u) { return 1e-6 * max_gap(u); }

inline constexpr double kTolResonance = 1e-6;

inline void require_distinct(const Vec& u) {
  const double tol = tol_distinct(u);
  const int n = static_cast<int>(u.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(u(i) - u(j)) <= tol)
        throw DegenerateInputError("coincident deformation parameters u_" +
                                   std::to_string(i) + ", u_" + std::to_string(j));
}

// A line angle psi is admissible when no difference u_i - u_j is orthogonal
// to the direction e^{-i psi}: Re(e^{i psi}(u_i - u_j)) != 0 for all i != j.
inline bool is_admissible(const Vec& u, double psi) {
  const double tol = tol_admissible(u);
  const Cplx rot(std::cos(psi), std::sin(psi));
  const int n = static_cast<int>(u.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs((rot * (u(i) - u(j))).real()) <= tol) return false;
  return true;
}

inline void require_admissible(const Vec& u, double psi) {
  if (!is_admissible(u, psi))
    throw DegenerateInputError("line angle psi is not admissible for u");
}

struct DeformationPoint {
  Vec u;
  double psi = 0.0;

  int n() const { return static_cast<int>(u.size()); }
  void validate() const {
    require(u.size() >= 1, "DeformationPoint: empty u");
    require_distinct(u);
    require_admissible(u, psi);
  }
};

// Eigenvalues mu of V must satisfy mu_i - mu_j not a nonzero integer.
inline void require_nonresonant(const Mat& v, double tol = kTolResonance) {
  auto ev = eigen(v);
  const int n = static_cast<int>(v.rows());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const Cplx d = ev.values(i) - ev.values(j);
      const long k = std::lround(d.real());
      if (k != 0 && std::abs(d - Cplx(static_cast<double>(k), 0.0)) <= tol)
        throw DegenerateInputError("resonant spectrum: mu_i - mu_j near integer " +
                                   std::to_string(k));
    }
}

// --- Poisson data of the deformation equations -------------------------------

// Gamma1 has off-diagonal entries v_ij / (u_j - u_i) and zero diagonal. Only
// the commutators [Gamma1, E_i] enter the flow, and those are insensitive to
// any diagonal choice; the series initializer in the monodromy module fixes
// its own diagonal from the next recursion order instead.
inline Mat gamma1(const Mat& v, const Vec& u) {
  require_skew(v, "gamma1");
  require(v.rows() == u.size(), "gamma1: dimension mismatch");
  require_distinct(u);
  const int n = static_cast<int>(v.rows());
  Mat g = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) g(i, j) = v(i, j) / (u(j) - u(i));
  return g;
}

// V_i = [Gamma1, E_i]
inline Mat deformation_generator(const Mat& v, const Vec& u, int i) {
  const int n = static_cast<int>(v.rows());
  require(0 <= i && i < n, "deformation_generator: index out of range");
  const Mat g = gamma1(v, u);
  Mat vi = Mat::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    vi(a, i) += g(a, i);   // (Gamma1 E_i)
    vi(i, a) -= g(i, a);   // -(E_i Gamma1)
  }
  return vi;
}

// dV/du_i = [V, V_i]
inline Mat lax_rhs(const Mat& v, const Vec& u, int i) {
  const Mat vi = deformation_generator(v, u, i);
  return v * vi - vi * v;
}

// H_i = 1/2 sum_{j != i} v_ij^2 / (u_i - u_j)
inline Cplx hamiltonian(const Mat& v, const Vec& u, int i) {
  require_skew(v, "hamiltonian");
  require(v.rows() == u.size(), "hamiltonian: dimension mismatch");
  require_distinct(u);
  const int n = static_cast<int>(v.rows());
  require(0 <= i && i < n, "hamiltonian: index out of range");
  Cplx h(0.0);
  for (int j = 0; j < n; ++j)
    if (j != i) h += 0.5 * v(i, j) * v(i, j) / (u(i) - u(j));
  return h;
}

// Flow of H_i through the linear bracket, in the {H, .} slot order: the
// chain rule {H_i, v_ab} = sum_r dH_i/dv_r {v_r, v_ab}(V) reproduces
// lax_rhs entrywise (this orientation is pinned by that equality; the
// opposite slot order produces the time-reversed flow).
inline Mat hamiltonian_vector_field(const Mat& v, const Vec& u, int i) {
  const int n = static_cast<int>(v.rows());
  require(0 <= i && i < n, "hamiltonian_vector_field: index out of range");
  require_skew(v, "hamiltonian_vector_field");
  require_distinct(u);
  const auto cs = coords(n);
  // gradient of H_i: nonzero only on coordinates touching index i
  std::vector<Cplx> grad(cs.size(), Cplx(0.0));
  for (size_t r = 0; r < cs.size(); ++r) {
    const auto [p, q] = cs[r];
    if (p == i || q == i) {
      const int other = (p == i) ? q : p;
      grad[r] = v(p, q) / (u(i) - u(other));
    }
  }
  Mat out = Mat::Zero(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      Cplx acc(0.0);
      for (size_t r = 0; r < cs.size(); ++r) {
        if (grad[r] == Cplx(0.0)) continue;
        acc += grad[r] * so_bracket_eval(v, cs[r], {a, b});
      }
      out(a, b) = acc;
      out(b, a) = -acc;
    }
  return out;
}

}  // namespace stokes::so
