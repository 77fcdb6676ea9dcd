#pragma once

#include <functional>
#include <variant>
#include <vector>

#include "stokes/linalg.hpp"

namespace stokes::ode {

struct OdeOptions {
  double rel_tol = 1e-13;
  double abs_tol = 1e-13;
  double max_step = 0.0;   // 0 = unlimited
  long max_steps = 20'000'000;
};

struct OdeStats {
  long accepted = 0;
  long rejected = 0;
};

// Dormand-Prince 5(4) with FSAL and the classic PI controller
// (safety 0.9, beta 0.04, factor clamp [0.2, 10]).
// f(t, y) -> dy/dt on complex state vectors; t is always real, complex
// contours are handled by the path parameterization below.
template <class F>
Vec integrate(F&& f, double t0, double t1, Vec y, const OdeOptions& opt,
              OdeStats* stats = nullptr) {
  static const double A21 = 1.0 / 5;
  static const double A31 = 3.0 / 40, A32 = 9.0 / 40;
  static const double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
  static const double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187,
                      A53 = 64448.0 / 6561, A54 = -212.0 / 729;
  static const double A61 = 9017.0 / 3168, A62 = -355.0 / 33,
                      A63 = 46732.0 / 5247, A64 = 49.0 / 176,
                      A65 = -5103.0 / 18656;
  static const double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192,
                      B5 = -2187.0 / 6784, B6 = 11.0 / 84;
  static const double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920,
                      E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40;

  require(t1 >= t0, "integrate: reversed time span");
  require(opt.rel_tol > 1e-14 && opt.rel_tol < 1e-2 && opt.abs_tol > 1e-14 &&
              opt.abs_tol < 1e-2,
          "integrate: tolerances must lie in (1e-14, 1e-2)");
  if (t1 == t0) return y;

  const double span = t1 - t0;
  const Eigen::Index n = y.size();
  Vec k1 = f(t0, y), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n);

  auto err_norm = [&](const Vec& e, const Vec& y0v, const Vec& y1v) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sc = opt.abs_tol +
          opt.rel_tol * std::max(std::abs(y0v(i)), std::abs(y1v(i)));
      const double q = std::abs(e(i)) / sc;
      acc += q * q;
    }
    return std::sqrt(acc / static_cast<double>(n));
  };

  // initial step from the usual d0/d1 heuristic
  double d0 = 0.0, d1 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sc = opt.abs_tol + opt.rel_tol * std::abs(y(i));
    d0 += std::norm(y(i) / sc);
    d1 += std::norm(k1(i) / sc);
  }
  double h = (d0 > 1e-10 && d1 > 1e-10) ? 0.01 * std::sqrt(d0 / d1) : 1e-6 * span;
  h = std::min(h, span);
  if (opt.max_step > 0.0) h = std::min(h, opt.max_step);

  double t = t0;
  double facold = 1e-4;
  long accepted = 0, rejected = 0;
  const double safety = 0.9, beta = 0.04, expo1 = 0.2 - beta * 0.75;

  while (t < t1) {
    if (accepted + rejected > opt.max_steps)
      throw AccuracyError("integrate: step limit exceeded");
    if (t + h > t1) h = t1 - t;

    ytmp = y + h * (A21 * k1);
    k2 = f(t + h * (1.0 / 5), ytmp);
    ytmp = y + h * (A31 * k1 + A32 * k2);
    k3 = f(t + h * (3.0 / 10), ytmp);
    ytmp = y + h * (A41 * k1 + A42 * k2 + A43 * k3);
    k4 = f(t + h * (4.0 / 5), ytmp);
    ytmp = y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4);
    k5 = f(t + h * (8.0 / 9), ytmp);
    ytmp = y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5);
    k6 = f(t + h, ytmp);
    ynew = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
    k7 = f(t + h, ynew);

    const Vec errv = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
    const double err = err_norm(errv, y, ynew);

    if (err <= 1.0) {
      t += h;
      y.swap(ynew);
      k1.swap(k7);  // FSAL
      ++accepted;
      const double fac11 = std::pow(std::max(err, 1e-16), expo1);
      double fac = fac11 / std::pow(facold, beta);
      fac = std::max(0.2, std::min(10.0, safety / fac));
      facold = std::max(err, 1e-4);
      h *= fac;
      if (opt.max_step > 0.0) h = std::min(h, opt.max_step);
    } else {
      ++rejected;
      const double fac11 = std::pow(err, expo1);
      h *= std::max(0.2, safety / fac11);
      // a step collapsing to nothing means the rhs is blowing up on the path
      if (h < 1e-15 * span || t + h == t)
        throw AccuracyError("integrate: step size underflow", h);
    }
  }
  if (stats) {
    stats->accepted += accepted;
    stats->rejected += rejected;
  }
  return y;
}

// --- contours in the z-plane -------------------------------------------------

struct Segment {
  Cplx z0, z1;
};

// angles in radians; th1 < th0 traverses clockwise
struct CircArc {
  Cplx center;
  double radius;
  double th0, th1;
};

using PathLeg = std::variant<Segment, CircArc>;
using Path = std::vector<PathLeg>;

inline Cplx leg_point(const PathLeg& leg, double t) {
  if (std::holds_alternative<Segment>(leg)) {
    const auto& s = std::get<Segment>(leg);
    return s.z0 + t * (s.z1 - s.z0);
  }
  const auto& a = std::get<CircArc>(leg);
  const double th = a.th0 + t * (a.th1 - a.th0);
  return a.center + a.radius * Cplx(std::cos(th), std::sin(th));
}

inline Cplx leg_velocity(const PathLeg& leg, double t) {
  if (std::holds_alternative<Segment>(leg)) {
    const auto& s = std::get<Segment>(leg);
    return s.z1 - s.z0;
  }
  const auto& a = std::get<CircArc>(leg);
  const double th = a.th0 + t * (a.th1 - a.th0);
  return Cplx(0.0, 1.0) * a.radius * (a.th1 - a.th0) *
         Cplx(std::cos(th), std::sin(th));
}

// Analytic continuation of dY/dz = A(z) Y along a path, each leg
// parameterized on t in [0, 1].
template <class AFn>
Mat integrate_linear(AFn&& A, const Path& path, Mat y0,
                     const OdeOptions& opt = {}, OdeStats* stats = nullptr) {
  require_square_finite(y0, "integrate_linear");
  const Eigen::Index n = y0.rows();
  Vec flat = Eigen::Map<const Vec>(y0.data(), n * n);
  for (const PathLeg& leg : path) {
    auto rhs = [&](double t, const Vec& yv) -> Vec {
      const Cplx z = leg_point(leg, t);
      const Cplx dz = leg_velocity(leg, t);
      Eigen::Map<const Mat> ym(yv.data(), n, n);
      Mat d = dz * (A(z) * ym);
      return Eigen::Map<const Vec>(d.data(), n * n);
    };
    flat = integrate(rhs, 0.0, 1.0, std::move(flat), opt, stats);
  }
  return Eigen::Map<const Mat>(flat.data(), n, n);
}

}  // namespace stokes::ode
