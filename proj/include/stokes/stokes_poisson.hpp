#pragma once

#include <algorithm>
#include <array>
#include <cstdlib>
#include <map>
#include <utility>
#include <vector>

#include "stokes/reflection.hpp"

namespace stokes::bracket {

using Coord = std::pair<int, int>;

inline int coord_count(int n) { return n * (n - 1) / 2; }

inline int coord_index(int n, int i, int j) {
  require(0 <= i && i < j && j < n, "coord_index: pair must be ordered");
  return i * (2 * n - i - 1) / 2 + (j - i - 1);
}

inline std::vector<Coord> coords(int n) {
  std::vector<Coord> out;
  out.reserve(static_cast<size_t>(coord_count(n)));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out.emplace_back(i, j);
  return out;
}

inline std::vector<Cplx> coord_values(const StokesMatrix& s) {
  std::vector<Cplx> out;
  out.reserve(static_cast<size_t>(coord_count(s.n())));
  for (int i = 0; i < s.n(); ++i)
    for (int j = i + 1; j < s.n(); ++j) out.push_back(s.s(i, j));
  return out;
}

// Sparse polynomial in the Stokes coordinates with integer coefficients and
// degree at most four. Every identity of the bracket, its Jacobi sums, and
// the braid pushforwards lives inside that degree bound, so all structural
// checks run in exact arithmetic.
class Poly {
 public:
  // Monomial: sorted coordinate indices, -1 padding in front.
  using Mono = std::array<int, 4>;

  static Poly constant(long w) {
    Poly p;
    p.add({-1, -1, -1, -1}, w);
    return p;
  }

  static Poly var(int c) {
    require(c >= 0, "Poly: negative coordinate");
    Poly p;
    p.add({-1, -1, -1, c}, 1);
    return p;
  }

  void add(Mono m, long w) {
    if (w == 0) return;
    auto it = t_.find(m);
    if (it == t_.end()) {
      t_.emplace(m, w);
    } else if ((it->second += w) == 0) {
      t_.erase(it);
    }
  }

  Poly operator-() const {
    Poly p;
    for (const auto& [m, w] : t_) p.t_.emplace(m, -w);
    return p;
  }

  Poly& operator+=(const Poly& o) {
    for (const auto& [m, w] : o.t_) add(m, w);
    return *this;
  }

  Poly operator+(const Poly& o) const {
    Poly p = *this;
    p += o;
    return p;
  }

  Poly operator-(const Poly& o) const { return *this + (-o); }

  Poly operator*(long w) const {
    Poly p;
    if (w != 0)
      for (const auto& [m, c] : t_) p.t_.emplace(m, c * w);
    return p;
  }

  Poly operator*(const Poly& o) const {
    Poly p;
    for (const auto& [ma, wa] : t_)
      for (const auto& [mb, wb] : o.t_) {
        Mono m{-1, -1, -1, -1};
        int k = 4;
        for (int v : mb)
          if (v >= 0) m[--k] = v;
        for (int v : ma)
          if (v >= 0) {
            require(k > 0, "Poly: degree above four");
            m[--k] = v;
          }
        std::sort(m.begin(), m.end());
        p.add(m, wa * wb);
      }
    return p;
  }

  Poly derivative(int c) const {
    Poly p;
    for (const auto& [m, w] : t_) {
      int count = 0;
      for (int v : m) count += (v == c);
      if (count == 0) continue;
      Mono d{-1, -1, -1, -1};
      int k = 4;
      bool dropped = false;
      for (int idx = 3; idx >= 0; --idx) {
        if (m[idx] == c && !dropped) {
          dropped = true;
          continue;
        }
        if (m[idx] >= 0) d[--k] = m[idx];
      }
      std::sort(d.begin(), d.end());
      p.add(d, w * count);
    }
    return p;
  }

  Cplx eval(const std::vector<Cplx>& s) const {
    Cplx total(0.0, 0.0);
    for (const auto& [m, w] : t_) {
      Cplx term(static_cast<double>(w), 0.0);
      for (int v : m)
        if (v >= 0) {
          require(v < static_cast<int>(s.size()), "Poly: coordinate range");
          term *= s[static_cast<size_t>(v)];
        }
      total += term;
    }
    return total;
  }

  bool zero() const { return t_.empty(); }

  long max_abs_coeff() const {
    long best = 0;
    for (const auto& [m, w] : t_) best = std::max(best, std::abs(w));
    return best;
  }

  bool operator==(const Poly& o) const = default;

  const std::map<Mono, long>& terms() const { return t_; }

 private:
  std::map<Mono, long> t_;
};

// {s_p, s_q} as an integer quadratic form in units of kappa/2. The six index
// patterns: shared first, shared second, chained, separated, nested, crossed;
// the crossed case carries twice the unit.
inline Poly bracket_form(int n, Coord p, Coord q) {
  const auto [i, k] = p;
  const auto [j, l] = q;
  require(0 <= i && i < k && k < n && 0 <= j && j < l && l < n,
          "bracket_form: pairs must be ordered and in range");
  if (p == q) return Poly{};
  if (q < p) return -bracket_form(n, q, p);
  const auto v = [n](int a, int b) { return Poly::var(coord_index(n, a, b)); };
  if (i == j) return v(k, l) * 2 - v(i, k) * v(i, l);  // k < l here
  if (k == l) return v(i, j) * 2 - v(i, k) * v(j, k);
  if (k == j) return v(i, k) * v(k, l) - v(i, l) * 2;
  if (k < j || k > l) return Poly{};  // separated / nested
  return (v(i, j) * v(k, l) - v(i, l) * v(j, k)) * 2;  // crossed i<j<k<l
}

inline Cplx stokes_bracket(const StokesMatrix& s, Coord p, Coord q,
                           Cplx kappa = default_kappa()) {
  return 0.5 * kappa * bracket_form(s.n(), p, q).eval(coord_values(s));
}

// All coordinate brackets of one matrix, stored once per unordered pair with
// the canonical orientation p < q; reads flip the sign.
struct BracketTable {
  int n = 0;
  Cplx kappa;
  std::vector<Cplx> entries;  // packed (pidx, qidx), pidx < qidx

  static int slot(int m, int pidx, int qidx) {
    return pidx * (2 * m - pidx - 1) / 2 + (qidx - pidx - 1);
  }

  Cplx value(int pidx, int qidx) const {
    const int m = coord_count(n);
    require(0 <= pidx && pidx < m && 0 <= qidx && qidx < m,
            "BracketTable: coordinate index out of range");
    if (pidx == qidx) return Cplx(0.0, 0.0);
    if (pidx < qidx) return entries[static_cast<size_t>(slot(m, pidx, qidx))];
    return -entries[static_cast<size_t>(slot(m, qidx, pidx))];
  }
};

inline BracketTable bracket_table(const StokesMatrix& s,
                                  Cplx kappa = default_kappa()) {
  BracketTable t;
  t.n = s.n();
  t.kappa = kappa;
  const auto cs = coords(t.n);
  const auto vals = coord_values(s);
  const int m = coord_count(t.n);
  t.entries.reserve(static_cast<size_t>(m * (m - 1) / 2));
  for (int p = 0; p < m; ++p)
    for (int q = p + 1; q < m; ++q)
      t.entries.push_back(
          0.5 * kappa *
          bracket_form(t.n, cs[static_cast<size_t>(p)],
                       cs[static_cast<size_t>(q)])
              .eval(vals));
  return t;
}

// {f, g} by the chain rule: gradients indexed by the packed coordinate order.
inline Cplx poisson_eval(const StokesMatrix& s, const std::vector<Cplx>& gf,
                         const std::vector<Cplx>& gg,
                         Cplx kappa = default_kappa()) {
  const int m = coord_count(s.n());
  require(static_cast<int>(gf.size()) == m && static_cast<int>(gg.size()) == m,
          "poisson_eval: gradient length must be n(n-1)/2");
  const BracketTable t = bracket_table(s, kappa);
  Cplx total(0.0, 0.0);
  for (int p = 0; p < m; ++p)
    for (int q = p + 1; q < m; ++q)
      total += (gf[static_cast<size_t>(p)] * gg[static_cast<size_t>(q)] -
                gf[static_cast<size_t>(q)] * gg[static_cast<size_t>(p)]) *
               t.value(p, q);
  return total;
}

namespace detail {

inline std::vector<std::vector<Poly>> form_matrix(int n) {
  const auto cs = coords(n);
  const int m = coord_count(n);
  std::vector<std::vector<Poly>> f(static_cast<size_t>(m),
                                   std::vector<Poly>(static_cast<size_t>(m)));
  for (int p = 0; p < m; ++p)
    for (int q = p + 1; q < m; ++q) {
      f[static_cast<size_t>(p)][static_cast<size_t>(q)] = bracket_form(
          n, cs[static_cast<size_t>(p)], cs[static_cast<size_t>(q)]);
      f[static_cast<size_t>(q)][static_cast<size_t>(p)] =
          -f[static_cast<size_t>(p)][static_cast<size_t>(q)];
    }
  return f;
}

}  // namespace detail

// Max |{{s_p,s_q},s_r} + {{s_q,s_r},s_p} + {{s_r,s_p},s_q}| over coordinate
// triples, inner brackets differentiated exactly and evaluated at s.
inline double jacobi_residual(const StokesMatrix& s,
                              Cplx kappa = default_kappa()) {
  const int n = s.n();
  const int m = coord_count(n);
  const auto f = detail::form_matrix(n);
  const auto vals = coord_values(s);
  std::vector<std::vector<Cplx>> bv(static_cast<size_t>(m),
                                    std::vector<Cplx>(static_cast<size_t>(m)));
  for (int p = 0; p < m; ++p)
    for (int q = 0; q < m; ++q)
      bv[static_cast<size_t>(p)][static_cast<size_t>(q)] =
          f[static_cast<size_t>(p)][static_cast<size_t>(q)].eval(vals);
  const auto triple = [&](int p, int q, int r) {
    Cplx sum(0.0, 0.0);
    for (int c = 0; c < m; ++c) {
      const Poly d = f[static_cast<size_t>(p)][static_cast<size_t>(q)]
                         .derivative(c);
      if (d.zero()) continue;
      sum += d.eval(vals) * bv[static_cast<size_t>(c)][static_cast<size_t>(r)];
    }
    return sum;
  };
  const double unit2 = std::norm(0.5 * kappa);
  double worst = 0.0;
  for (int p = 0; p < m; ++p)
    for (int q = p + 1; q < m; ++q)
      for (int r = q + 1; r < m; ++r)
        worst = std::max(
            worst,
            std::abs(triple(p, q, r) + triple(q, r, p) + triple(r, p, q)));
  return worst * unit2;
}

// Exact form of the same sums: the largest integer coefficient left after
// cancellation, zero when the bracket satisfies Jacobi identically.
inline long jacobi_exact(int n) {
  const int m = coord_count(n);
  const auto f = detail::form_matrix(n);
  const auto triple = [&](int p, int q, int r) {
    Poly sum;
    for (int c = 0; c < m; ++c)
      sum += f[static_cast<size_t>(p)][static_cast<size_t>(q)].derivative(c) *
             f[static_cast<size_t>(c)][static_cast<size_t>(r)];
    return sum;
  };
  long worst = 0;
  for (int p = 0; p < m; ++p)
    for (int q = p + 1; q < m; ++q)
      for (int r = q + 1; r < m; ++r) {
        const Poly sum = triple(p, q, r) + triple(q, r, p) + triple(r, p, q);
        worst = std::max(worst, sum.max_abs_coeff());
      }
  return worst;
}

// Coefficients of det(mu*1 - S^{-1}S^T), leading first, with the forced
// leading 1 and constant (-1)^n dropped. The spectrum of S^{-1}S^T is closed
// under inversion, so these are the independent Casimir values.
inline std::vector<Cplx> casimirs(const StokesMatrix& s) {
  const Mat m = s.matrix();
  const Mat p = invert(m).inverse * m.transpose();
  std::vector<Cplx> cp = char_poly(p);
  return std::vector<Cplx>(cp.begin() + 1, cp.end() - 1);
}

// The two displayed n=4 Casimir polynomials in the coordinates
// (p,q,r,x,y,z) = (s01,s02,s03,s12,s13,s23).
inline Poly casimir_c1_poly() {
  const Poly p = Poly::var(0), q = Poly::var(1), r = Poly::var(2);
  const Poly x = Poly::var(3), y = Poly::var(4), z = Poly::var(5);
  return Poly::constant(-4) + p * p + q * q + r * r + x * x + y * y + z * z -
         p * q * x - p * r * y - q * r * z - x * y * z + p * r * x * z;
}

// The quartic squares pair each coordinate with its disjoint complement
// (s01 with s23 and so on); together with the positive cubic block this is
// the sum of principal 2x2 minors of S^{-1}S^T, which braid invariance and
// commutation with all coordinates both pin.
inline Poly casimir_c2_poly() {
  const Poly p = Poly::var(0), q = Poly::var(1), r = Poly::var(2);
  const Poly x = Poly::var(3), y = Poly::var(4), z = Poly::var(5);
  const Poly squares = p * p + q * q + r * r + x * x + y * y + z * z;
  const Poly cubics = p * q * x + p * r * y + q * r * z + x * y * z;
  return Poly::constant(6) - squares * 2 + cubics * 2 -
         (p * q * y * z + q * r * x * y) * 2 + p * p * z * z + q * q * y * y +
         r * r * x * x;
}

inline std::pair<Cplx, Cplx> casimirs_n4_explicit(const StokesMatrix& s) {
  require(s.n() == 4, "casimirs_n4_explicit: needs n = 4");
  const auto vals = coord_values(s);
  return {casimir_c1_poly().eval(vals), casimir_c2_poly().eval(vals)};
}

// Central-difference coordinate gradient, step 1e-6 * (1 + |s_c|) per
// coordinate; the polynomial functionals here are holomorphic, so a real
// step recovers the complex derivative.
template <typename Fn>
std::vector<Cplx> fd_gradient(const StokesMatrix& s, Fn&& f,
                              double step = 1e-6) {
  const auto cs = coords(s.n());
  std::vector<Cplx> grad;
  grad.reserve(cs.size());
  for (const auto& [i, j] : cs) {
    const Cplx base = s.s(i, j);
    const double h = step * (1.0 + std::abs(base));
    StokesMatrix hi = s, lo = s;
    hi.set(i, j, base + h);
    lo.set(i, j, base - h);
    grad.push_back((f(hi) - f(lo)) / (2.0 * h));
  }
  return grad;
}

// ---- Braid group action ----------------------------------------------------

struct BraidLetter {
  int gen = 0;  // 0-based: generator g acts on strands (g, g+1)
  bool inverse = false;
};

using BraidWord = std::vector<BraidLetter>;

namespace detail {

inline Mat braid_k(const StokesMatrix& s, int g, bool inverse) {
  const int n = s.n();
  Mat k = Mat::Identity(n, n);
  const Cplx sg = s.s(g, g + 1);
  k(g, g + 1) = 1.0;
  k(g + 1, g) = 1.0;
  if (!inverse) {
    k(g, g) = -sg;
    k(g + 1, g + 1) = 0.0;
  } else {
    k(g, g) = 0.0;
    k(g + 1, g + 1) = -sg;
  }
  return k;
}

inline StokesMatrix reread_unitriangular(const Mat& t, const char* who) {
  const int n = static_cast<int>(t.rows());
  const double tol = 1e-10 * std::max(1.0, max_abs(t));
  double res = 0.0;
  for (int i = 0; i < n; ++i) {
    res = std::max(res, std::abs(t(i, i) - Cplx(1.0)));
    for (int j = 0; j < i; ++j) res = std::max(res, std::abs(t(i, j)));
  }
  if (res > tol)
    throw AccuracyError(std::string(who) + ": result not unitriangular", res);
  StokesMatrix out = StokesMatrix::identity(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out.set(i, j, t(i, j));
  return out;
}

}  // namespace detail

// sigma_g: S -> K S K with K_gg = -s_{g,g+1}, K_{g,g+1} = K_{g+1,g} = 1,
// K_{g+1,g+1} = 0. The inverse solves the forward map: the conjugator is the
// explicit inverse of K built from the transformed matrix, whose generator
// entry is -s_{g,g+1}; a round trip validates the solution.
inline StokesMatrix braid_generator(const StokesMatrix& s, int g,
                                    bool inverse = false) {
  require(0 <= g && g <= s.n() - 2, "braid_generator: generator out of range");
  const Mat k = detail::braid_k(s, g, inverse);
  const StokesMatrix out = detail::reread_unitriangular(
      Mat(k * s.matrix() * k), "braid_generator");
  if (inverse) {
    const StokesMatrix back = braid_generator(out, g, false);
    const double res = max_abs(Mat(back.matrix() - s.matrix()));
    if (res > 1e-10 * std::max(1.0, max_abs(s.matrix())))
      throw AccuracyError("braid_generator: inverse round trip failed", res);
  }
  return out;
}

inline StokesMatrix braid_apply(const StokesMatrix& s, const BraidWord& w) {
  StokesMatrix out = s;
  for (const BraidLetter& letter : w)
    out = braid_generator(out, letter.gen, letter.inverse);
  return out;
}

// Component polynomials of sigma_g: entry (i,j) of K S K with symbolic
// coordinates. The lower triangle cancels and the diagonal is 1 identically;
// both are asserted, which proves unitriangularity exactly for this n.
inline std::vector<Poly> braid_components(int n, int g) {
  require(0 <= g && g <= n - 2, "braid_components: generator out of range");
  using PolyMat = std::vector<std::vector<Poly>>;
  const auto zero_mat = [n]() {
    return PolyMat(static_cast<size_t>(n),
                   std::vector<Poly>(static_cast<size_t>(n)));
  };
  PolyMat s = zero_mat(), k = zero_mat();
  for (int i = 0; i < n; ++i) {
    s[static_cast<size_t>(i)][static_cast<size_t>(i)] = Poly::constant(1);
    for (int j = i + 1; j < n; ++j)
      s[static_cast<size_t>(i)][static_cast<size_t>(j)] =
          Poly::var(coord_index(n, i, j));
  }
  for (int i = 0; i < n; ++i)
    if (i != g && i != g + 1)
      k[static_cast<size_t>(i)][static_cast<size_t>(i)] = Poly::constant(1);
  k[static_cast<size_t>(g)][static_cast<size_t>(g)] =
      -Poly::var(coord_index(n, g, g + 1));
  k[static_cast<size_t>(g)][static_cast<size_t>(g + 1)] = Poly::constant(1);
  k[static_cast<size_t>(g + 1)][static_cast<size_t>(g)] = Poly::constant(1);
  const auto mul = [&](const PolyMat& a, const PolyMat& b) {
    PolyMat c = zero_mat();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int h = 0; h < n; ++h)
          c[static_cast<size_t>(i)][static_cast<size_t>(j)] +=
              a[static_cast<size_t>(i)][static_cast<size_t>(h)] *
              b[static_cast<size_t>(h)][static_cast<size_t>(j)];
    return c;
  };
  const PolyMat t = mul(mul(k, s), k);
  std::vector<Poly> out(static_cast<size_t>(coord_count(n)));
  for (int i = 0; i < n; ++i) {
    require(t[static_cast<size_t>(i)][static_cast<size_t>(i)] ==
                Poly::constant(1),
            "braid_components: diagonal must be 1 identically");
    for (int j = 0; j < i; ++j)
      require(t[static_cast<size_t>(i)][static_cast<size_t>(j)].zero(),
              "braid_components: lower triangle must vanish identically");
    for (int j = i + 1; j < n; ++j)
      out[static_cast<size_t>(coord_index(n, i, j))] =
          t[static_cast<size_t>(i)][static_cast<size_t>(j)];
  }
  return out;
}

// Exact pushforward check of one generator: for every coordinate pair,
// sum_{p',q'} (d sigma_p / d s_p')(d sigma_q / d s_q') {s_p', s_q'}
// must equal {s_p, s_q} composed with sigma. Returns the largest integer
// coefficient of the difference (zero when the bracket is invariant).
inline long braid_pushforward_exact(int n, int g) {
  const int m = coord_count(n);
  const auto comp = braid_components(n, g);
  const auto f = detail::form_matrix(n);
  // Substitute the component polynomials into a quadratic form.
  const auto compose = [&](const Poly& q) {
    Poly out;
    for (const auto& [mono, w] : q.terms()) {
      Poly term = Poly::constant(w);
      for (int v : mono)
        if (v >= 0) term = term * comp[static_cast<size_t>(v)];
      out += term;
    }
    return out;
  };
  std::vector<std::vector<Poly>> jac(
      static_cast<size_t>(m), std::vector<Poly>(static_cast<size_t>(m)));
  for (int p = 0; p < m; ++p)
    for (int c = 0; c < m; ++c)
      jac[static_cast<size_t>(p)][static_cast<size_t>(c)] =
          comp[static_cast<size_t>(p)].derivative(c);
  long worst = 0;
  for (int p = 0; p < m; ++p)
    for (int q = p + 1; q < m; ++q) {
      Poly lhs;
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
          const Poly& fab = f[static_cast<size_t>(a)][static_cast<size_t>(b)];
          if (fab.zero()) continue;
          lhs += jac[static_cast<size_t>(p)][static_cast<size_t>(a)] *
                 jac[static_cast<size_t>(q)][static_cast<size_t>(b)] * fab;
        }
      const Poly diff =
          lhs - compose(f[static_cast<size_t>(p)][static_cast<size_t>(q)]);
      worst = std::max(worst, diff.max_abs_coeff());
    }
  return worst;
}

// Numeric pushforward residual at one matrix, exact polynomial Jacobians.
inline double braid_pushforward_residual(const StokesMatrix& s, int g,
                                         Cplx kappa = default_kappa()) {
  const int n = s.n();
  const int m = coord_count(n);
  const auto comp = braid_components(n, g);
  const auto f = detail::form_matrix(n);
  const auto vals = coord_values(s);
  const StokesMatrix image = braid_generator(s, g);
  const auto image_vals = coord_values(image);
  Mat jac(m, m);
  for (int p = 0; p < m; ++p)
    for (int c = 0; c < m; ++c)
      jac(p, c) = comp[static_cast<size_t>(p)].derivative(c).eval(vals);
  Mat bv(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      bv(a, b) = f[static_cast<size_t>(a)][static_cast<size_t>(b)].eval(vals);
  const Mat pushed = jac * bv * jac.transpose();
  double worst = 0.0;
  for (int p = 0; p < m; ++p)
    for (int q = 0; q < m; ++q) {
      const Cplx want =
          f[static_cast<size_t>(p)][static_cast<size_t>(q)].eval(image_vals);
      worst = std::max(worst, std::abs(pushed(p, q) - want));
    }
  return worst * std::abs(0.5 * kappa);
}

}  // namespace stokes::bracket
