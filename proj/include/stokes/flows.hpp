#pragma once

#include <utility>
#include <vector>

#include "stokes/monodromy.hpp"

namespace stokes::flows {

using monodromy::IntegratorConfig;
using monodromy::PathError;

// Piecewise-straight path in u-space. Every sampled point of every leg must
// be pairwise distinct and admissible for the shared line angle psi: the
// canonical ordering of Re(e^{i psi} u) can then never flip mid-leg, which is
// what makes endpoint Stokes matrices comparable slot by slot.
struct DeformationPath {
  std::vector<so::DeformationPoint> waypoints;

  int n() const {
    return waypoints.empty() ? 0 : waypoints.front().n();
  }

  void validate() const {
    require(!waypoints.empty(), "DeformationPath: no waypoints");
    const int nn = waypoints.front().n();
    const double psi = waypoints.front().psi;
    for (const auto& w : waypoints) {
      require(w.n() == nn, "DeformationPath: waypoints of mixed size");
      require(w.psi == psi, "DeformationPath: waypoints of mixed line angle");
    }
    constexpr int kSamples = 64;
    for (size_t leg = 0; leg + 1 < waypoints.size(); ++leg) {
      const Vec& a = waypoints[leg].u;
      const Vec& b = waypoints[leg + 1].u;
      for (int s = 0; s <= kSamples; ++s) {
        const double t = static_cast<double>(s) / kSamples;
        const Vec us = a + t * (b - a);
        bool ok = so::is_admissible(us, psi);
        if (ok) {
          try {
            so::require_distinct(us);
          } catch (const DegenerateInputError&) {
            ok = false;
          }
        }
        if (!ok)
          throw PathError("DeformationPath: leg " + std::to_string(leg) +
                          " leaves the admissible region near t = " +
                          std::to_string(t));
      }
    }
  }
};

// Which assembly produces the deformation field. Both evaluate to the same
// matrix; keeping the two routes side by side guards the bracket formulation
// against drift from the direct commutator.
enum class RhsAssembly { commutator, hamiltonian };

namespace detail {

template <class RhsFn>
Vec integrate_legs(const DeformationPath& path, Vec y0, RhsFn&& leg_rhs,
                   const ode::OdeOptions& opt) {
  Vec y = std::move(y0);
  for (size_t leg = 0; leg + 1 < path.waypoints.size(); ++leg) {
    const Vec& a = path.waypoints[leg].u;
    const Vec du = path.waypoints[leg + 1].u - a;
    if (max_abs(Mat(du)) == 0.0) continue;
    auto rhs = [&](double t, const Vec& yv) -> Vec {
      return leg_rhs(Vec(a + t * du), du, yv);
    };
    y = ode::integrate(rhs, 0.0, 1.0, std::move(y), opt);
  }
  return y;
}

}  // namespace detail

// Transport V along the path by the isomonodromic flow
//   dV = sum_i [V_i, V] du_i,   V_i = [Gamma_1, E_i].
// This is the direction that conserves the Stokes matrix; its time reverse
// (the commutator written the other way round) conserves nothing. Skewness is
// preserved because [V_i, V] is a commutator of skew matrices; the endpoint
// is explicitly re-projected to kill accumulated roundoff asymmetry.
inline Mat integrate_lax(const Mat& v0, const DeformationPath& path,
                         const IntegratorConfig& cfg = {},
                         RhsAssembly route = RhsAssembly::commutator) {
  cfg.validate();
  so::require_skew(v0, "integrate_lax");
  path.validate();
  require(static_cast<int>(v0.rows()) == path.n(),
          "integrate_lax: dimension mismatch");
  const int n = path.n();
  auto leg_rhs = [&](const Vec& u, const Vec& du, const Vec& yv) -> Vec {
    Eigen::Map<const Mat> vm(yv.data(), n, n);
    const Mat v = vm;
    Mat d = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      if (du(i) == Cplx(0.0)) continue;
      const Mat r = route == RhsAssembly::commutator
                        ? so::lax_rhs(v, u, i)
                        : so::hamiltonian_vector_field(v, u, i);
      d -= du(i) * r;
    }
    return Eigen::Map<const Vec>(d.data(), n * n);
  };
  Vec y = Eigen::Map<const Vec>(v0.data(), n * n);
  y = detail::integrate_legs(path, std::move(y), leg_rhs, cfg.ode_options());
  Mat v = Eigen::Map<const Mat>(y.data(), n, n);
  return 0.5 * (v - v.transpose().eval());
}

// Transport a residue tuple by the Schlesinger system
//   dA_i = sum_{j != i} [A_i, A_j]/(u_i - u_j) (du_i - du_j).
// The sum of residues is a first integral of the exact flow; the endpoint
// tuple is rebuilt with B_inf = -sum A_i so it satisfies the structural
// invariant exactly, and the drift against the initial B_inf is enforced.
inline fuchsian::ResidueTuple integrate_schlesinger(
    const fuchsian::ResidueTuple& a0, const DeformationPath& path,
    const IntegratorConfig& cfg = {}) {
  cfg.validate();
  a0.validate();
  path.validate();
  require(a0.n() == path.n(), "integrate_schlesinger: pole count mismatch");
  const int n = a0.n(), d = a0.dim();
  const int block = d * d;

  Vec y(n * block);
  for (int i = 0; i < n; ++i)
    y.segment(i * block, block) =
        Eigen::Map<const Vec>(a0.B[static_cast<size_t>(i)].data(), block);

  auto leg_rhs = [&](const Vec& u, const Vec& du, const Vec& yv) -> Vec {
    std::vector<Mat> A(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
      A[static_cast<size_t>(i)] =
          Eigen::Map<const Mat>(yv.data() + i * block, d, d);
    std::vector<Mat> acc(static_cast<size_t>(n), Mat::Zero(d, d));
    for (int j = 0; j < n; ++j) {
      if (du(j) == Cplx(0.0)) continue;
      const auto dj = fuchsian::schlesinger_rhs(A, u, j);
      for (int i = 0; i < n; ++i)
        acc[static_cast<size_t>(i)] += du(j) * dj[static_cast<size_t>(i)];
    }
    Vec out(n * block);
    for (int i = 0; i < n; ++i)
      out.segment(i * block, block) =
          Eigen::Map<const Vec>(acc[static_cast<size_t>(i)].data(), block);
    return out;
  };
  y = detail::integrate_legs(path, std::move(y), leg_rhs, cfg.ode_options());

  fuchsian::ResidueTuple out;
  out.B.resize(static_cast<size_t>(n));
  Mat total = Mat::Zero(d, d);
  for (int i = 0; i < n; ++i) {
    out.B[static_cast<size_t>(i)] =
        Eigen::Map<const Mat>(y.data() + i * block, d, d);
    total += out.B[static_cast<size_t>(i)];
  }
  const double drift = max_abs(Mat(total + a0.B_inf));
  if (drift > 1e-9 * (1.0 + max_abs(a0.B_inf)))
    throw AccuracyError("integrate_schlesinger: residue sum drifted", drift);
  out.B_inf = -total;
  return out;
}

struct ConservationReport {
  double stokes_drift = 0.0;      // max entry change, canonical slots aligned
  double eigenvalue_drift = 0.0;  // matching distance of spectra of V
  std::vector<Cplx> hamiltonians_start;  // H_i at the first waypoint
  std::vector<Cplx> hamiltonians_end;    // H_i at the last (u-dependent)
  Mat v_end;
  monodromy::StokesResult stokes_start;
  monodromy::StokesResult stokes_end;
};

// End-to-end isomonodromy check: transport V, recompute the Stokes matrix at
// both endpoints, report drifts. The Hamiltonian values are informational
// only; they depend explicitly on u and are not conserved.
inline ConservationReport conservation_report(const Mat& v0,
                                              const DeformationPath& path,
                                              const IntegratorConfig& cfg = {}) {
  path.validate();
  ConservationReport rep;
  rep.v_end = integrate_lax(v0, path, cfg);
  const auto& start = path.waypoints.front();
  const auto& finish = path.waypoints.back();
  rep.stokes_start = monodromy::compute_stokes(v0, start, cfg);
  rep.stokes_end = monodromy::compute_stokes(rep.v_end, finish, cfg);
  require(rep.stokes_start.permutation == rep.stokes_end.permutation,
          "conservation_report: canonical ordering changed along the path");
  for (size_t k = 0; k < rep.stokes_start.S.upper().size(); ++k)
    rep.stokes_drift =
        std::max(rep.stokes_drift, std::abs(rep.stokes_end.S.upper()[k] -
                                            rep.stokes_start.S.upper()[k]));
  rep.eigenvalue_drift =
      matching_distance(eigen(rep.v_end).values, eigen(v0).values);
  const int n = path.n();
  for (int i = 0; i < n; ++i) {
    rep.hamiltonians_start.push_back(so::hamiltonian(v0, start.u, i));
    rep.hamiltonians_end.push_back(so::hamiltonian(rep.v_end, finish.u, i));
  }
  return rep;
}

}  // namespace stokes::flows
