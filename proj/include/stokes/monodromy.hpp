#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

#include "stokes/fuchsian.hpp"
#include "stokes/ode.hpp"
#include "stokes/poisson_so.hpp"
#include "stokes/stokes_poisson.hpp"

namespace stokes::monodromy {

// A contour came too close to a singularity of the system: the adaptive
// integrator collapsed its step size.
struct PathError : Error {
  explicit PathError(const std::string& msg) : Error(msg) {}
};

struct IntegratorConfig {
  double rel_tol = 1e-13;
  double abs_tol = 1e-13;
  double max_step = 0.0;         // 0 = unlimited
  double matching_radius = 0.0;  // 0 = automatic, see auto note below
  int asymptotic_order = 2;      // series depth of the initializer, 1 or 2
  int path_points_per_arc = 8;   // sub-legs per quarter arc

  void validate() const {
    require(rel_tol > 1e-14 && rel_tol < 1e-2 && abs_tol > 1e-14 &&
                abs_tol < 1e-2,
            "IntegratorConfig: tolerances must lie in (1e-14, 1e-2)");
    require(asymptotic_order == 1 || asymptotic_order == 2,
            "IntegratorConfig: asymptotic_order must be 1 or 2");
    require(path_points_per_arc >= 1 && path_points_per_arc <= 1024,
            "IntegratorConfig: path_points_per_arc out of range");
    require(max_step >= 0.0 && matching_radius >= 0.0,
            "IntegratorConfig: negative step or radius");
  }

  ode::OdeOptions ode_options() const {
    ode::OdeOptions opt;
    opt.rel_tol = rel_tol;
    opt.abs_tol = abs_tol;
    opt.max_step = max_step;
    return opt;
  }
};

struct StokesResult {
  StokesMatrix S = StokesMatrix::identity(1);
  std::vector<int> permutation;  // position k in S <- original index perm[k]
  double s_minus_residual = 0.0;
  double triangularity_residual = 0.0;
  double spectral_residual = 0.0;
  double matching_radius = 0.0;  // radius actually used (auto or configured)
};

// Every accepted StokesResult keeps all three diagnostics below this bound.
inline constexpr double kDiagnosticTol = 1e-6;

// Analytic continuation of dY/dz = A(z) Y along a polyline/arc contour.
// Step-size underflow (a singularity on or near the path) surfaces as
// PathError; everything else propagates unchanged.
template <class AFn>
Mat integrate_linear(AFn&& A, const ode::Path& path, Mat y0,
                     const IntegratorConfig& cfg = {}) {
  cfg.validate();
  try {
    return ode::integrate_linear(std::forward<AFn>(A), path, std::move(y0),
                                 cfg.ode_options());
  } catch (const AccuracyError& e) {
    if (std::string(e.what()).find("underflow") != std::string::npos)
      throw PathError(std::string("integrate_linear: ") + e.what());
    throw;
  }
}

namespace detail {

// Coefficients of the formal series Y = (1 + G_1/z + G_2/z^2 + ...) e^{zU}
// solving Y' = (U + V/z)Y. Substituting the series gives, at order z^{-m-1},
//   [U, G_{m+1}] = -(m + V) G_m,
// which determines the off-diagonal part of G_{m+1} from G_m, while the
// diagonal part of the same relation one order down forces
//   (G_m)_ii = -(V G_m)_ii / m
// (well defined: V has zero diagonal, so only off-diagonal G_m enters).
inline std::vector<Mat> gamma_series(const Mat& v, const std::vector<Cplx>& cu,
                                     int kmax) {
  const int n = static_cast<int>(v.rows());
  std::vector<Mat> g{Mat::Identity(n, n)};
  for (int m = 1; m <= kmax; ++m) {
    const Mat rhs = static_cast<double>(m - 1) * g.back() + v * g.back();
    Mat gm = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) gm(i, j) = rhs(i, j) / (cu[j] - cu[i]);
    for (int i = 0; i < n; ++i) {
      Cplx acc(0.0);
      for (int k = 0; k < n; ++k)
        if (k != i) acc += v(i, k) * gm(k, i);
      gm(i, i) = -acc / static_cast<double>(m);
    }
    g.push_back(gm);
  }
  return g;
}

inline std::vector<Cplx> to_nodes(const Vec& u) {
  std::vector<Cplx> cu(static_cast<size_t>(u.size()));
  for (Eigen::Index i = 0; i < u.size(); ++i)
    cu[static_cast<size_t>(i)] = u(i);
  return cu;
}

// W' = [U, W] + (V/z) W, the frame with Y = W e^{zU}. W stays O(1) where the
// asymptotic series is valid, which is what keeps the scheme conditioned.
inline Mat integrate_frame(const Mat& v, const std::vector<Cplx>& cu, Mat w0,
                           const ode::Path& path, const ode::OdeOptions& opt) {
  const int n = static_cast<int>(v.rows());
  Vec flat = Eigen::Map<const Vec>(w0.data(), n * n);
  for (const ode::PathLeg& leg : path) {
    auto rhs = [&](double t, const Vec& yv) -> Vec {
      const Cplx z = ode::leg_point(leg, t);
      const Cplx dz = ode::leg_velocity(leg, t);
      Eigen::Map<const Mat> ym(yv.data(), n, n);
      Mat d(n, n);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) d(a, b) = (cu[a] - cu[b]) * ym(a, b);
      d += (v * ym) / z;
      d *= dz;
      return Eigen::Map<const Vec>(d.data(), n * n);
    };
    try {
      flat = ode::integrate(rhs, 0.0, 1.0, std::move(flat), opt);
    } catch (const AccuracyError& e) {
      if (std::string(e.what()).find("underflow") != std::string::npos)
        throw PathError(std::string("frame integration: ") + e.what());
      throw;
    }
  }
  return Eigen::Map<const Mat>(flat.data(), n, n);
}

inline ode::Path split_arc(Cplx center, double radius, double th0, double th1,
                           int pieces) {
  ode::Path p;
  for (int k = 0; k < pieces; ++k) {
    const double a = th0 + (th1 - th0) * k / pieces;
    const double b = th0 + (th1 - th0) * (k + 1) / pieces;
    p.push_back(ode::CircArc{center, radius, a, b});
  }
  return p;
}

}  // namespace detail

// Series coefficients G_1..G_kmax at the (possibly rotated) pole nodes.
inline std::vector<Mat> gamma_coefficients(const Mat& v, const Vec& u,
                                           int kmax) {
  so::require_skew(v, "gamma_coefficients");
  require(v.rows() == u.size(), "gamma_coefficients: dimension mismatch");
  require(kmax >= 1, "gamma_coefficients: kmax must be positive");
  so::require_distinct(u);
  auto g = detail::gamma_series(v, detail::to_nodes(u), kmax);
  g.erase(g.begin());  // drop G_0 = 1
  return g;
}

// Truncated asymptotic solution (1 + G_1/z [+ G_2/z^2]) e^{zU}. Valid only
// far out: |z| must dominate the series scale (the radius rule keeps
// ||G_1||/|z| < 0.01).
inline Mat asymptotic_init(const Mat& v, const Vec& u, Cplx z, int order) {
  require(order == 1 || order == 2, "asymptotic_init: order must be 1 or 2");
  const auto g = gamma_coefficients(v, u, order);
  double g1 = max_abs(g[0]);
  require(std::abs(z) >= 100.0 * g1,
          "asymptotic_init: |z| below the series validity radius");
  const int n = static_cast<int>(v.rows());
  Mat w = Mat::Identity(n, n) + g[0] / z;
  if (order == 2) w += g[1] / (z * z);
  for (int b = 0; b < n; ++b) w.col(b) *= std::exp(z * u(b));
  return w;
}

// Optimal-assignment distance between eigenvalues of (S^T)^{-1} S and the
// exponentiated spectrum e^{2 pi i mu} of V.
inline double spectral_check(const StokesMatrix& s, const Mat& v) {
  so::require_skew(v, "spectral_check");
  require(v.rows() == s.n(), "spectral_check: dimension mismatch");
  const Mat sm = s.matrix();
  const Mat p = sm.transpose().partialPivLu().solve(sm);
  const auto muv = eigen(v).values;
  Vec target(v.rows());
  for (Eigen::Index k = 0; k < v.rows(); ++k)
    target(k) = std::exp(Cplx(0.0, 2.0 * kPi) * muv(k));
  return matching_distance(eigen(p).values, target);
}

// Stokes matrix of Y' = (U + V/z) Y by sectorial matching.
//
// Scheme: rotate z = e^{i psi} w so the matching line becomes the positive
// real axis, order the poles by increasing Re(e^{i psi} u) (the convention
// that produced an upper-triangular connection matrix when both orders were
// tried against the 2x2 oracle; the opposite order yields the transpose
// picture), and work in the frame W = Y e^{-zU}:
//   1. initialize W by the truncated series at w = +-iR on the neutral rays,
//      where every e^{w(u_a - u_b)} has unit modulus and series errors do not
//      amplify along the inbound radial legs;
//   2. integrate radially inward to |w| = r_c with r_c * maxgap <= 3, so the
//      exponential conditioning of the matching step stays bounded by e^6;
//   3. sweep quarter arcs to w+ = r_c and w- = -r_c and form
//      C+- = e^{-wU} (W_R^{-1} W_L) e^{+wU} entrywise.
// C+ is the upper-triangular Stokes factor, C- its lower counterpart, and
// C- = C+^T is reported as a residual, not assumed.
inline StokesResult compute_stokes(const Mat& v, const so::DeformationPoint& dp,
                                   const IntegratorConfig& cfg = {}) {
  cfg.validate();
  so::require_skew(v, "compute_stokes");
  require(v.rows() == dp.u.size(), "compute_stokes: dimension mismatch");
  const int n = static_cast<int>(v.rows());

  StokesResult out;
  if (n == 1) {
    out.S = StokesMatrix::identity(1);
    out.permutation = {0};
    return out;
  }
  dp.validate();
  so::require_nonresonant(v);

  const Cplx rot(std::cos(dp.psi), std::sin(dp.psi));
  out.permutation.resize(static_cast<size_t>(n));
  std::iota(out.permutation.begin(), out.permutation.end(), 0);
  std::sort(out.permutation.begin(), out.permutation.end(), [&](int a, int b) {
    return (rot * dp.u(a)).real() < (rot * dp.u(b)).real();
  });

  std::vector<Cplx> cu(static_cast<size_t>(n));
  Mat vp(n, n);
  for (int a = 0; a < n; ++a) {
    cu[static_cast<size_t>(a)] = rot * dp.u(out.permutation[static_cast<size_t>(a)]);
    for (int b = 0; b < n; ++b)
      vp(a, b) = v(out.permutation[static_cast<size_t>(a)],
                   out.permutation[static_cast<size_t>(b)]);
  }

  double max_gap = 0.0, max_skew = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      max_gap = std::max(max_gap, std::abs(cu[static_cast<size_t>(a)] -
                                           cu[static_cast<size_t>(b)]));
      max_skew = std::max(max_skew, std::abs((cu[static_cast<size_t>(a)] -
                                              cu[static_cast<size_t>(b)])
                                                 .imag()));
    }
  const double r_c = std::min(2.0, 3.0 / max_gap);
  require(r_c >= 0.05,
          "compute_stokes: pole spread too large for the matching scheme");

  const int order = cfg.asymptotic_order;
  const auto g = detail::gamma_series(vp, cu, order + 1);
  double radius = cfg.matching_radius;
  if (radius == 0.0) {
    // default scale, the series-validity bound, and a truncation bound
    // calibrated so the dropped term contributes < ~1e-9 to S
    double u_scale = 0.0;
    for (const Cplx& c : cu) u_scale = std::max(u_scale, std::abs(c));
    radius = 40.0 * std::max({1.0, u_scale, max_abs(g[1])});
    radius = std::max(radius, 100.0 * max_abs(g[1]));
    radius = std::max(radius, std::pow(max_abs(g[static_cast<size_t>(order + 1)]) / 3e-10,
                                       1.0 / (order + 1)));
    radius = std::max(radius, 8.0 * r_c);
  } else {
    require(radius >= 100.0 * max_abs(g[1]) && radius > 4.0 * r_c,
            "compute_stokes: configured matching radius too small");
  }
  out.matching_radius = radius;

  // neutral-ray validity: series errors transported from R to r_c grow like
  // exp((R - r_c) * max |Im(e^{i psi}(u_a - u_b))|); beyond e^8 that wipes
  // out the ~1e-9 initialization accuracy the diagnostics budget assumes
  const double skew_exponent = (radius - r_c) * max_skew;
  if (skew_exponent >= 8.0)
    throw AccuracyError(
        "compute_stokes: poles are too far from collinear with the matching "
        "direction; asymptotic data cannot be transported at this accuracy",
        skew_exponent);

  auto series_at = [&](Cplx w) {
    Mat acc = Mat::Identity(n, n);
    Cplx zp(1.0);
    for (int m = 1; m <= order; ++m) {
      zp *= w;
      acc += g[static_cast<size_t>(m)] / zp;
    }
    return acc;
  };

  const auto opt = cfg.ode_options();
  const Cplx iR(0.0, radius), irc(0.0, r_c);
  const int arcs = cfg.path_points_per_arc;
  const Mat wl0 = detail::integrate_frame(vp, cu, series_at(iR),
                                          {ode::Segment{iR, irc}}, opt);
  const Mat wr0 = detail::integrate_frame(vp, cu, series_at(-iR),
                                          {ode::Segment{-iR, -irc}}, opt);
  const Mat wlp = detail::integrate_frame(
      vp, cu, wl0, detail::split_arc(Cplx(0), r_c, kPi / 2, 0.0, arcs), opt);
  const Mat wlm = detail::integrate_frame(
      vp, cu, wl0, detail::split_arc(Cplx(0), r_c, kPi / 2, kPi, arcs), opt);
  const Mat wrp = detail::integrate_frame(
      vp, cu, wr0, detail::split_arc(Cplx(0), r_c, -kPi / 2, 0.0, arcs), opt);
  const Mat wrm = detail::integrate_frame(
      vp, cu, wr0, detail::split_arc(Cplx(0), r_c, -kPi / 2, -kPi, arcs), opt);

  auto connection = [&](const Mat& wr, const Mat& wl, Cplx w) {
    Mat c = wr.partialPivLu().solve(wl);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        c(a, b) *= std::exp(w * (cu[static_cast<size_t>(b)] -
                                 cu[static_cast<size_t>(a)]));
    return c;
  };
  const Mat cplus = connection(wrp, wlp, Cplx(r_c, 0.0));
  const Mat cminus = connection(wrm, wlm, Cplx(-r_c, 0.0));

  for (int a = 0; a < n; ++a)
    for (int b = 0; b <= a; ++b) {
      const double dev =
          std::abs(cplus(a, b) - (a == b ? Cplx(1.0) : Cplx(0.0)));
      out.triangularity_residual = std::max(out.triangularity_residual, dev);
    }
  if (out.triangularity_residual > kDiagnosticTol)
    throw AccuracyError(
        "compute_stokes: connection matrix is not upper triangular in the "
        "canonical (increasing) order; flipped ordering would be required",
        out.triangularity_residual);

  out.s_minus_residual = max_abs(Mat(cminus - cplus.transpose()));
  if (out.s_minus_residual > kDiagnosticTol)
    throw AccuracyError("compute_stokes: S_- = S_+^T residual out of bounds",
                        out.s_minus_residual);

  const double zero_floor = std::max(100.0 * cfg.abs_tol, 1e-11);
  Mat s = Mat::Identity(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      s(a, b) = std::abs(cplus(a, b)) < zero_floor ? Cplx(0.0) : cplus(a, b);
  out.S = StokesMatrix::from_matrix(s);

  out.spectral_residual = spectral_check(out.S, vp);
  if (out.spectral_residual > kDiagnosticTol)
    throw AccuracyError("compute_stokes: spectral constraint residual out of "
                        "bounds",
                        out.spectral_residual);
  return out;
}

// Monodromy generators of the Fuchsian system dPhi/dz = sum B_i/(z - u_i) Phi
// with B_i built from V. Loops circle each pole once counterclockwise from a
// base point below the real axis (keyhole contours: horizontal at Im(base),
// vertical ascent, full circle of radius min-gap/3). Raw keyhole generators
// L_i close the pair-trace identity only for adjacent poles; the returned
// tuple is re-expressed as
//   M_i = (L_1 ... L_{i-1}) L_i (L_1 ... L_{i-1})^{-1}
// which closes Tr(M_i M_j) = n - 4 + s_ij^2 for every pair and preserves the
// spectrum of the ordered product (conjugators pinned numerically at n=4
// against all six pair traces; adjacent-only and L_0-anchored variants fail).
inline std::vector<Mat> fuchsian_loop_monodromy(const Mat& v, const Vec& u,
                                                Cplx base,
                                                const IntegratorConfig& cfg = {}) {
  cfg.validate();
  so::require_skew(v, "fuchsian_loop_monodromy");
  require(v.rows() == u.size(), "fuchsian_loop_monodromy: dimension mismatch");
  so::require_distinct(u);
  const int n = static_cast<int>(v.rows());
  require(n >= 2, "fuchsian_loop_monodromy: need at least two poles");
  double im_spread = 0.0, u_scale = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    im_spread = std::max(im_spread, std::abs(u(i).imag()));
    u_scale = std::max(u_scale, std::abs(u(i)));
  }
  require(im_spread <= 1e-9 * std::max(1.0, u_scale),
          "fuchsian_loop_monodromy: poles must sit on the real axis");

  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return u(a).real() < u(b).real(); });
  double min_gap = std::numeric_limits<double>::infinity();
  for (int k = 0; k + 1 < n; ++k)
    min_gap = std::min(min_gap, u(order[static_cast<size_t>(k + 1)]).real() -
                                    u(order[static_cast<size_t>(k)]).real());
  const double rho = min_gap / 3.0;
  require(base.imag() < -0.5 * rho,
          "fuchsian_loop_monodromy: base point must lie below the real axis");
  for (Eigen::Index i = 0; i < u.size(); ++i)
    require(std::abs(base - u(i)) > rho,
            "fuchsian_loop_monodromy: base point too close to a pole");

  const auto rt = fuchsian::residues_from_V(v);
  auto A = [&](Cplx z) {
    Mat a = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) a += rt.B[static_cast<size_t>(i)] / (z - u(i));
    return a;
  };

  const auto opt = cfg.ode_options();
  std::vector<Mat> loops;
  for (int k = 0; k < n; ++k) {
    const Cplx pole = u(order[static_cast<size_t>(k)]);
    const Cplx below(pole.real(), base.imag());
    const Cplx entry = pole - Cplx(0.0, rho);
    ode::Path path{ode::Segment{base, below}, ode::Segment{below, entry}};
    const ode::Path circle =
        detail::split_arc(pole, rho, -kPi / 2, 3 * kPi / 2,
                          4 * cfg.path_points_per_arc);
    path.insert(path.end(), circle.begin(), circle.end());
    path.push_back(ode::Segment{entry, below});
    path.push_back(ode::Segment{below, base});
    try {
      loops.push_back(
          ode::integrate_linear(A, path, Mat::Identity(n, n), opt));
    } catch (const AccuracyError& e) {
      if (std::string(e.what()).find("underflow") != std::string::npos)
        throw PathError(std::string("fuchsian_loop_monodromy: ") + e.what());
      throw;
    }
  }

  std::vector<Mat> m;
  Mat w = Mat::Identity(n, n);
  for (int k = 0; k < n; ++k) {
    m.push_back(Mat(w * loops[static_cast<size_t>(k)] *
                    w.partialPivLu().solve(Mat::Identity(n, n))));
    if (k >= 1) w = w * loops[static_cast<size_t>(k)];
  }
  return m;
}

// Finite-difference pushforward of the linear skew bracket through V -> S.
// The Jacobian uses one complex central difference per coordinate (the map is
// holomorphic in each v_ij); the returned table is
//   T[p][q] = sum_{r,r'} J[p][r] J[q][r'] {v_r, v_r'}(V).
// The result coincides with the quadratic bracket at coupling kappa = 2 pi i.
// The scale is rigid, not conventional: the n=2 closed form
// s^2 = -4 sinh^2(pi v) forces ds/dv = +-2 pi i at the origin, so the
// linearized pushforward is +-2 pi i s_kl, and the measured table matches the
// full quadratic bracket at 2 pi i entrywise (both real and imaginary parts,
// finite-difference accuracy ~1e-6).
inline bracket::BracketTable pushforward_bracket(const Mat& v,
                                                 const so::DeformationPoint& dp,
                                                 const IntegratorConfig& cfg = {},
                                                 double fd_scale = 1e-5) {
  require(fd_scale > 0.0 && fd_scale < 1e-2,
          "pushforward_bracket: bad finite-difference scale");
  const int n = static_cast<int>(v.rows());
  const StokesResult base = compute_stokes(v, dp, cfg);
  const auto cs = so::coords(n);
  const int m = static_cast<int>(cs.size());

  std::vector<std::vector<Cplx>> jac(static_cast<size_t>(m));
  auto upper = so::upper_of(v);
  for (int r = 0; r < m; ++r) {
    const double h =
        fd_scale * (1.0 + std::abs(upper[static_cast<size_t>(r)]));
    auto perturbed = [&](double sign) {
      auto up = upper;
      up[static_cast<size_t>(r)] += sign * h;
      try {
        const StokesResult res =
            compute_stokes(so::skew_from_upper(n, up), dp, cfg);
        require(res.permutation == base.permutation,
                "pushforward_bracket: permutation changed under perturbation");
        return res.S.upper();
      } catch (const AccuracyError& e) {
        throw AccuracyError(
            "pushforward_bracket: perturbed monodromy failed at coordinate (" +
                std::to_string(cs[static_cast<size_t>(r)].first) + "," +
                std::to_string(cs[static_cast<size_t>(r)].second) +
                "), sign " + (sign > 0 ? "+" : "-") + ": " + e.what(),
            e.residual);
      }
    };
    const auto sp = perturbed(+1.0), sm = perturbed(-1.0);
    std::vector<Cplx>& col = jac[static_cast<size_t>(r)];
    col.resize(static_cast<size_t>(m));
    for (int p = 0; p < m; ++p)
      col[static_cast<size_t>(p)] =
          (sp[static_cast<size_t>(p)] - sm[static_cast<size_t>(p)]) / (2.0 * h);
  }

  const Mat tensor = so::so_tensor(v);
  bracket::BracketTable table;
  table.n = n;
  table.kappa = Cplx(0.0, 2.0 * kPi);  // effective coupling the map realizes
  table.entries.assign(static_cast<size_t>(m * (m - 1) / 2), Cplx(0.0));
  for (int p = 0; p < m; ++p)
    for (int q = p + 1; q < m; ++q) {
      Cplx acc(0.0);
      for (int r = 0; r < m; ++r)
        for (int rp = 0; rp < m; ++rp) {
          if (tensor(r, rp) == Cplx(0.0)) continue;
          acc += jac[static_cast<size_t>(r)][static_cast<size_t>(p)] *
                 jac[static_cast<size_t>(rp)][static_cast<size_t>(q)] *
                 tensor(r, rp);
        }
      table.entries[static_cast<size_t>(
          bracket::BracketTable::slot(m, p, q))] = acc;
    }
  return table;
}

}  // namespace stokes::monodromy
