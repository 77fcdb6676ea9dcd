#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <future>
#include <string>
#include <utility>
#include <vector>

#include "stokes/flows.hpp"
#include "stokes/fuchsian.hpp"
#include "stokes/monodromy.hpp"
#include "stokes/reflection.hpp"
#include "stokes/rng.hpp"
#include "stokes/stokes_poisson.hpp"

namespace stokes::verify {

struct Check {
  std::string name;
  double residual = 0.0;
  double bound = 0.0;
  bool passed = false;
};

struct SuiteReport {
  std::string suite;
  std::vector<Check> checks;

  bool passed() const {
    for (const Check& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

namespace detail {

inline void add(SuiteReport& r, std::string name, double residual,
                double bound) {
  r.checks.push_back({std::move(name), residual, bound, residual <= bound});
}

inline StokesMatrix random_stokes(Rng& rng, int n, double radius) {
  return StokesMatrix::from_matrix(rng.unitriangular_complex(n, radius));
}

// Real skew V rescaled into the Frobenius ball the monodromy scheme is
// calibrated for.
inline Mat bounded_skew(Rng& rng, int n, double norm_cap) {
  Mat v = rng.skew_real(n, norm_cap);
  const double f = v.norm();
  if (f > norm_cap) v *= norm_cap / f;
  return v;
}

}  // namespace detail

// Exact and closed-form identities: reflection traces, residue traces, the
// quadratic bracket's displayed tables, Jacobi, braid action, Casimirs.
inline SuiteReport algebraic_suite(std::uint64_t seed) {
  using namespace bracket;
  SuiteReport rep{"algebraic", {}};
  Rng rng(seed);

  double invol = 0.0, cox = 0.0, pair2 = 0.0, conj3 = 0.0, quad4 = 0.0;
  double res_pair = 0.0, res_triple = 0.0, res_vsum = 0.0;
  double jac_num = 0.0;
  for (int n = 3; n <= 6; ++n) {
    for (int rep_i = 0; rep_i < 3; ++rep_i) {
      const StokesMatrix s = detail::random_stokes(rng, n, 0.5);
      const reflection::ReflectionTuple t =
          reflection::reflections_from_stokes(s);
      for (int i = 0; i < n; ++i)
        invol = std::max(
            invol, max_abs(Mat(t.M[static_cast<size_t>(i)] *
                                   t.M[static_cast<size_t>(i)] -
                               Mat::Identity(n, n))));
      const Mat sm = s.matrix();
      cox = std::max(cox,
                     max_abs(Mat(reflection::coxeter_product(s) +
                                 invert(sm).inverse * sm.transpose())));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          if (i == j) continue;
          const Cplx sij = s.sym(i, j);
          const Cplx traced = (t.M[static_cast<size_t>(i)] *
                               t.M[static_cast<size_t>(j)])
                                  .trace();
          pair2 = std::max(pair2,
                           std::abs(Cplx(n - 4, 0.0) + sij * sij - traced));
          for (int k = 0; k < n; ++k) {
            if (k == i || k == j) continue;
            const Cplx w = s.sym(k, j) - sij * s.sym(i, k);
            const Cplx tr4 = (t.M[static_cast<size_t>(k)] *
                              t.M[static_cast<size_t>(i)] *
                              t.M[static_cast<size_t>(j)] *
                              t.M[static_cast<size_t>(i)])
                                 .trace();
            conj3 = std::max(conj3,
                             std::abs(Cplx(n - 4, 0.0) + w * w - tr4));
          }
        }
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
          for (int k = j + 1; k < n; ++k)
            for (int l = k + 1; l < n; ++l) {
              const Cplx closed = reflection::trace_quadruple(s, i, j, k, l);
              const Cplx traced =
                  (reflection::reflection_matrix(s, i) *
                   reflection::reflection_matrix(s, j) *
                   reflection::reflection_matrix(s, k) *
                   reflection::reflection_matrix(s, l))
                      .trace();
              quad4 = std::max(quad4, std::abs(closed - traced));
            }
      jac_num = std::max(jac_num, jacobi_residual(s));

      const Mat v = rng.skew_complex(n, 0.5);
      const auto rt = fuchsian::residues_from_V(v);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          if (i == j) continue;
          const Mat bij = rt.B[static_cast<size_t>(i)] *
                          rt.B[static_cast<size_t>(j)];
          res_pair =
              std::max(res_pair, std::abs(bij.trace() + v(i, j) * v(i, j)));
          Cplx want = -0.5 * v(i, j) * v(i, j);
          for (int k = 0; k < n; ++k)
            if (k != i && k != j) want += v(i, j) * v(k, i) * v(j, k);
          res_vsum = std::max(res_vsum, std::abs((bij * v).trace() - want));
          for (int k = 0; k < n; ++k) {
            if (k == i || k == j) continue;
            const Cplx tr3 = (bij * rt.B[static_cast<size_t>(k)]).trace();
            res_triple = std::max(
                res_triple, std::abs(tr3 + v(i, j) * v(j, k) * v(k, i)));
          }
        }
    }
  }
  detail::add(rep, "reflection/involution", invol, 1e-12);
  detail::add(rep, "reflection/coxeter-product", cox, 1e-11);
  detail::add(rep, "reflection/trace-pair", pair2, 1e-12);
  detail::add(rep, "reflection/trace-conjugated", conj3, 1e-12);
  detail::add(rep, "reflection/trace-quadruple", quad4, 1e-11);
  detail::add(rep, "residues/pair-trace", res_pair, 1e-12);
  detail::add(rep, "residues/triple-trace", res_triple, 1e-12);
  detail::add(rep, "residues/v-weighted-trace", res_vsum, 1e-12);
  detail::add(rep, "bracket/jacobi-numeric", jac_num, 1e-10);
  detail::add(rep, "bracket/jacobi-exact-n4",
              static_cast<double>(jacobi_exact(4)), 0.0);

  // Displayed quadratic forms, exact coefficient comparison.
  {
    long bad = 0;
    const Poly x = Poly::var(0), y = Poly::var(1), z = Poly::var(2);
    bad += bracket_form(3, {0, 1}, {0, 2}) == z * 2 - x * y ? 0 : 1;
    bad += bracket_form(3, {0, 2}, {1, 2}) == x * 2 - y * z ? 0 : 1;
    bad += bracket_form(3, {0, 1}, {1, 2}) == x * z - y * 2 ? 0 : 1;
    const Poly p4 = Poly::var(0), r4 = Poly::var(2);
    const Poly x4 = Poly::var(3), z4 = Poly::var(5);
    bad += bracket_form(4, {0, 2}, {1, 3}) == (p4 * z4 - r4 * x4) * 2 ? 0 : 1;
    bad += bracket_form(4, {0, 1}, {2, 3}).zero() ? 0 : 1;
    bad += bracket_form(4, {0, 3}, {1, 2}).zero() ? 0 : 1;
    detail::add(rep, "bracket/displayed-forms", static_cast<double>(bad), 0.0);
  }

  // Braid action: relations, far commutation, exact bracket pushforward,
  // Casimir invariance.
  double braid_rel = 0.0, far_comm = 0.0, cas_coeff = 0.0, cas_spec = 0.0;
  long push_exact = 0;
  for (int n : {4, 5}) {
    for (int g = 0; g <= n - 2; ++g)
      push_exact = std::max(push_exact, braid_pushforward_exact(n, g));
    for (int rep_i = 0; rep_i < 3; ++rep_i) {
      const StokesMatrix s = detail::random_stokes(rng, n, 0.5);
      for (int g = 0; g + 1 <= n - 2; ++g) {
        const StokesMatrix lhs = braid_apply(
            s, {{g, false}, {g + 1, false}, {g, false}});
        const StokesMatrix rhs = braid_apply(
            s, {{g + 1, false}, {g, false}, {g + 1, false}});
        braid_rel =
            std::max(braid_rel, max_abs(Mat(lhs.matrix() - rhs.matrix())));
      }
      if (n >= 4) {
        const StokesMatrix ab = braid_apply(s, {{0, false}, {n - 2, false}});
        const StokesMatrix ba = braid_apply(s, {{n - 2, false}, {0, false}});
        far_comm =
            std::max(far_comm, max_abs(Mat(ab.matrix() - ba.matrix())));
      }
      const StokesMatrix moved = braid_apply(s, {{0, false}, {1, true}});
      const auto ca = casimirs(s), cb = casimirs(moved);
      for (size_t k = 0; k < ca.size(); ++k)
        cas_coeff = std::max(cas_coeff, std::abs(ca[k] - cb[k]));
      const Mat sa = s.matrix(), sb = moved.matrix();
      cas_spec = std::max(
          cas_spec,
          matching_distance(eigen(invert(sa).inverse * sa.transpose()).values,
                            eigen(invert(sb).inverse * sb.transpose()).values));
    }
  }
  detail::add(rep, "braid/relations", braid_rel, 1e-11);
  detail::add(rep, "braid/far-commutation", far_comm, 1e-11);
  detail::add(rep, "braid/bracket-pushforward-exact",
              static_cast<double>(push_exact), 0.0);
  detail::add(rep, "casimirs/braid-invariant-coefficients", cas_coeff, 1e-11);
  detail::add(rep, "casimirs/braid-invariant-spectrum", cas_spec, 1e-11);

  // Char-poly coefficients Poisson-commute with every coordinate. The step
  // is widened to 1e-4: the coefficients carry binomial-sized magnitudes, so
  // the default step's rounding floor can graze the bound on unlucky seeds.
  {
    double commute = 0.0;
    for (int n : {3, 4}) {
      const StokesMatrix s = detail::random_stokes(rng, n, 0.5);
      const int m = coord_count(n);
      const size_t n_coeff = casimirs(s).size();
      for (size_t k = 0; k < n_coeff; ++k) {
        const auto grad = fd_gradient(
            s, [k](const StokesMatrix& t) { return casimirs(t)[k]; }, 1e-4);
        for (int p = 0; p < m; ++p) {
          std::vector<Cplx> delta(static_cast<size_t>(m), Cplx(0.0));
          delta[static_cast<size_t>(p)] = Cplx(1.0);
          commute = std::max(commute, std::abs(poisson_eval(s, grad, delta)));
        }
      }
    }
    detail::add(rep, "casimirs/fd-commute", commute, 1e-8);
  }

  // Trace-function brackets through the entry-level bracket reduce to the
  // quadratic coordinate table: {Tr M_iM_k, Tr M_jM_l} = 4 s_ik s_jl {s_ik,
  // s_jl}.
  {
    double worst = 0.0;
    const int n = 4;
    for (int rep_i = 0; rep_i < 2; ++rep_i) {
      const StokesMatrix s = detail::random_stokes(rng, n, 0.5);
      for (const Coord& pc : coords(n))
        for (const Coord& qc : coords(n)) {
          if (pc == qc) continue;
          const Cplx lhs = reflection::ks_trace_bracket(
              s, pc.first, pc.second, qc.first, qc.second);
          const Cplx rhs = 4.0 * s.s(pc.first, pc.second) *
                           s.s(qc.first, qc.second) *
                           stokes_bracket(s, pc, qc);
          worst = std::max(worst, std::abs(lhs - rhs));
        }
    }
    detail::add(rep, "trace-brackets/reduce-to-coordinates", worst, 1e-10);
  }

  return rep;
}

// Oracle and diagnostics checks for the irregular-singularity connection
// problem, the pole-loop cross-check, and the isomonodromic flow.
inline SuiteReport monodromy_suite(std::uint64_t seed,
                                   const monodromy::IntegratorConfig& cfg = {}) {
  SuiteReport rep{"monodromy", {}};
  Rng rng(seed);

  {
    double worst = 0.0;
    for (double v01 : {0.1, -0.2, 0.3}) {
      Mat v = Mat::Zero(2, 2);
      v(0, 1) = Cplx(v01, 0.0);
      v(1, 0) = -v(0, 1);
      Vec u(2);
      u << Cplx(0.0), Cplx(1.0);
      const auto r = monodromy::compute_stokes(v, {u, 0.0}, cfg);
      const Cplx s = r.S.s(0, 1);
      const double want = 4.0 * std::pow(std::sinh(kPi * v01), 2);
      worst = std::max(worst, std::abs(s * s + want) / want);
    }
    detail::add(rep, "stokes/two-pole-closed-form", worst, 1e-6);
  }

  {
    double diag = 0.0, stab = 0.0;
    for (int rep_i = 0; rep_i < 3; ++rep_i) {
      const Mat v = detail::bounded_skew(rng, 3, 0.3);
      const Vec u = rng.real_poles(3);
      const auto r = monodromy::compute_stokes(v, {u, 0.0}, cfg);
      diag = std::max({diag, r.s_minus_residual, r.triangularity_residual,
                       r.spectral_residual});
      monodromy::IntegratorConfig wide = cfg;
      wide.matching_radius = 2.0 * r.matching_radius;
      const auto r2 = monodromy::compute_stokes(v, {u, 0.0}, wide);
      stab = std::max(stab, max_abs(Mat(r.S.matrix() - r2.S.matrix())));
    }
    detail::add(rep, "stokes/three-pole-diagnostics", diag,
                monodromy::kDiagnosticTol);
    detail::add(rep, "stokes/radius-stability", stab, 1e-6);
  }

  {
    const Mat v = detail::bounded_skew(rng, 3, 0.3);
    const Vec u = rng.real_poles(3);
    const auto sres = monodromy::compute_stokes(v, {u, 0.0}, cfg);
    double min_re = 1e9;
    for (Eigen::Index i = 0; i < u.size(); ++i)
      min_re = std::min(min_re, u(i).real());
    const auto loops = monodromy::fuchsian_loop_monodromy(
        v, u, Cplx(min_re - 1.0, -2.0), cfg);
    const int n = 3;
    double tr_res = 0.0;
    // Loop index is the original pole index; S slots are canonical.
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const Mat& ma =
            loops[static_cast<size_t>(sres.permutation[static_cast<size_t>(i)])];
        const Mat& mb =
            loops[static_cast<size_t>(sres.permutation[static_cast<size_t>(j)])];
        const Cplx sij = sres.S.s(i, j);
        tr_res = std::max(tr_res, std::abs((ma * mb).trace() -
                                           Cplx(n - 4, 0.0) - sij * sij));
      }
    Mat prod = Mat::Identity(n, n);
    for (const Mat& m : loops) prod = prod * m;
    const Mat sm = sres.S.matrix();
    const double spec = matching_distance(
        eigen(prod).values, eigen(Mat(-invert(sm).inverse * sm.transpose())).values);
    detail::add(rep, "loops/pair-traces", tr_res, 1e-5);
    detail::add(rep, "loops/product-spectrum", spec, 1e-5);
  }

  {
    const Mat v = detail::bounded_skew(rng, 3, 0.3);
    flows::DeformationPath path;
    Vec u0(3), u1(3);
    u0 << Cplx(0.0), Cplx(1.1), Cplx(2.4);
    u1 << Cplx(0.2), Cplx(1.3), Cplx(2.2);
    path.waypoints = {{u0, 0.0}, {u1, 0.0}};
    const auto r = flows::conservation_report(v, path, cfg);
    detail::add(rep, "flow/stokes-drift", r.stokes_drift, 1e-5);
    detail::add(rep, "flow/eigenvalue-drift", r.eigenvalue_drift, 1e-9);
  }

  return rep;
}

// Finite-difference pushforward of the linear skew-coordinate bracket through
// the monodromy map against the quadratic table at the measured coupling.
inline SuiteReport pushforward_suite(std::uint64_t seed,
                                     const monodromy::IntegratorConfig& cfg = {}) {
  SuiteReport rep{"pushforward", {}};
  Rng rng(seed);
  double worst = 0.0, halving = 0.0;
  for (int rep_i = 0; rep_i < 2; ++rep_i) {
    const Mat v = detail::bounded_skew(rng, 3, 0.3);
    const Vec u = rng.real_poles(3);
    const so::DeformationPoint dp{u, 0.0};
    const auto t = monodromy::pushforward_bracket(v, dp, cfg);
    const auto sres = monodromy::compute_stokes(v, dp, cfg);
    const auto want = bracket::bracket_table(sres.S, t.kappa);
    const int m = bracket::coord_count(3);
    double scale = 0.0;
    for (const Cplx& e : want.entries) scale = std::max(scale, std::abs(e));
    for (int p = 0; p < m; ++p)
      for (int q = p + 1; q < m; ++q)
        worst = std::max(worst, std::abs(t.value(p, q) - want.value(p, q)) /
                                    scale);
    const auto t2 = monodromy::pushforward_bracket(v, dp, cfg, 0.5e-5);
    for (int p = 0; p < m; ++p)
      for (int q = p + 1; q < m; ++q)
        halving = std::max(halving, std::abs(t2.value(p, q) - t.value(p, q)) /
                                        scale);
  }
  detail::add(rep, "pushforward/matches-quadratic-table", worst, 1e-3);
  detail::add(rep, "pushforward/step-halving-stability", halving, 1e-4);
  return rep;
}

inline int worker_cap_from_env() {
  const char* e = std::getenv("STOKES_POISSON_THREADS");
  if (e == nullptr || *e == '\0') return 1;
  char* end = nullptr;
  const long v = std::strtol(e, &end, 10);
  require(end != nullptr && *end == '\0' && v >= 1 && v <= 1024,
          "STOKES_POISSON_THREADS must be a positive integer");
  return static_cast<int>(v);
}

// Runs the named suite, or all three. Suites are independent; with a worker
// cap above 1 they run concurrently, but assembly order is fixed, so output
// does not depend on the cap.
inline std::vector<SuiteReport> run_suites(
    const std::string& name, std::uint64_t seed,
    const monodromy::IntegratorConfig& cfg = {}, int workers = 1) {
  require(workers >= 1, "run_suites: worker count must be positive");
  std::vector<std::function<SuiteReport()>> tasks;
  if (name == "algebraic" || name == "all")
    tasks.push_back([seed] { return algebraic_suite(seed); });
  if (name == "monodromy" || name == "all")
    tasks.push_back([seed, cfg] { return monodromy_suite(seed, cfg); });
  if (name == "pushforward" || name == "all")
    tasks.push_back([seed, cfg] { return pushforward_suite(seed, cfg); });
  require(!tasks.empty(),
          "verify: unknown suite '" + name +
              "' (expected algebraic, monodromy, pushforward, or all)");

  std::vector<SuiteReport> out(tasks.size());
  if (workers == 1 || tasks.size() == 1) {
    for (size_t i = 0; i < tasks.size(); ++i) out[i] = tasks[i]();
    return out;
  }
  // Waves of at most `workers` concurrent suites.
  for (size_t base = 0; base < tasks.size();
       base += static_cast<size_t>(workers)) {
    std::vector<std::future<SuiteReport>> futs;
    const size_t stop =
        std::min(tasks.size(), base + static_cast<size_t>(workers));
    for (size_t i = base; i < stop; ++i)
      futs.push_back(std::async(std::launch::async, tasks[i]));
    for (size_t i = base; i < stop; ++i) out[i] = futs[i - base].get();
  }
  return out;
}

}  // namespace stokes::verify
