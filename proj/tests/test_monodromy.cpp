#include <catch2/catch_amalgamated.hpp>

#include "stokes/monodromy.hpp"
#include "stokes/rng.hpp"

using namespace stokes;
using namespace stokes::monodromy;

namespace {

double rel_err(Cplx got, Cplx want) {
  return std::abs(got - want) / std::max(1e-300, std::abs(want));
}

so::DeformationPoint point(std::initializer_list<Cplx> us, double psi = 0.0) {
  so::DeformationPoint dp;
  dp.u = Vec(static_cast<Eigen::Index>(us.size()));
  Eigen::Index k = 0;
  for (Cplx c : us) dp.u(k++) = c;
  dp.psi = psi;
  return dp;
}

double max_upper_diff(const StokesMatrix& a, const StokesMatrix& b) {
  REQUIRE(a.n() == b.n());
  double worst = 0.0;
  for (size_t k = 0; k < a.upper().size(); ++k)
    worst = std::max(worst, std::abs(a.upper()[k] - b.upper()[k]));
  return worst;
}

auto scalar_residue(Cplx c) {
  return [c](Cplx z) {
    Mat a(1, 1);
    a(0, 0) = c / z;
    return a;
  };
}

}  // namespace

TEST_CASE("contour transport", "[monodromy]") {
  SECTION("zero field leaves the frame untouched") {
    ode::Path path{ode::Segment{Cplx(1.0, -2.0), Cplx(3.0, 1.0)},
                   ode::CircArc{Cplx(3.0, 2.0), 1.0, -kPi / 2, kPi / 2}};
    Mat y0(2, 2);
    y0 << Cplx(1.0, 0.5), Cplx(-2.0), Cplx(0.0, 1.0), Cplx(4.0);
    Mat y = monodromy::integrate_linear(
        [](Cplx) -> Mat { return Mat::Zero(2, 2); }, path, y0);
    REQUIRE(max_abs(Mat(y - y0)) < 1e-14);
  }

  SECTION("constant diagonal field exponentiates") {
    Mat a = Mat::Zero(2, 2);
    a(0, 0) = Cplx(0.3, -0.2);
    a(1, 1) = Cplx(-0.1, 0.4);
    const Cplx z0(0.5, 0.5), z1(-1.0, 2.0);
    Mat y = monodromy::integrate_linear(
        [&](Cplx) { return a; }, {ode::Segment{z0, z1}}, Mat::Identity(2, 2));
    for (int i = 0; i < 2; ++i)
      REQUIRE(rel_err(y(i, i), std::exp((z1 - z0) * a(i, i))) < 1e-10);
  }

  SECTION("residue c/z around the origin gives e^{2 pi i c}") {
    ode::Path circle;
    for (int j = 0; j < 8; ++j)
      circle.push_back(ode::CircArc{Cplx(0.0), 2.0, 2 * kPi * j / 8.0,
                                    2 * kPi * (j + 1) / 8.0});
    // c = 1: the solution z^1 is single valued
    Mat y1 = monodromy::integrate_linear(scalar_residue(Cplx(1.0)), circle,
                                         Mat::Identity(1, 1));
    REQUIRE(rel_err(y1(0, 0), Cplx(1.0)) < 1e-9);
    // c = 1/2: the solution z^{1/2} flips sign
    Mat yh = monodromy::integrate_linear(scalar_residue(Cplx(0.5)), circle,
                                         Mat::Identity(1, 1));
    REQUIRE(rel_err(yh(0, 0), Cplx(-1.0)) < 1e-9);
  }

  SECTION("a pole on the contour raises PathError") {
    // residue -1: the solution 1/z diverges on the segment (residue +1 would
    // be the entire solution z and sail through)
    REQUIRE_THROWS_AS(
        monodromy::integrate_linear(scalar_residue(Cplx(-1.0)),
                                    {ode::Segment{Cplx(-1.0), Cplx(1.0)}},
                                    Mat::Identity(1, 1)),
        PathError);
  }

  SECTION("configuration is validated") {
    IntegratorConfig bad;
    bad.rel_tol = 0.0;
    REQUIRE_THROWS_AS(
        monodromy::integrate_linear([](Cplx) -> Mat { return Mat::Zero(1, 1); },
                                    {ode::Segment{Cplx(0.0), Cplx(1.0)}},
                                    Mat::Identity(1, 1), bad),
        ValidationError);
    IntegratorConfig worse;
    worse.asymptotic_order = 3;
    REQUIRE_THROWS_AS(worse.validate(), ValidationError);
  }
}

TEST_CASE("asymptotic initializer", "[monodromy]") {
  Rng rng(411);
  const Mat v = rng.skew_real(3, 0.25);
  const Vec u = rng.real_poles(3);

  SECTION("first coefficient matches the deformation generator source") {
    const Mat g1 = gamma_coefficients(v, u, 1)[0];
    const Mat ref = so::gamma1(v, u);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (i != j) REQUIRE(std::abs(g1(i, j) - ref(i, j)) < 1e-14);
    // the series pins the diagonal that the commutator construction ignores
    for (int i = 0; i < 3; ++i) {
      Cplx acc(0.0);
      for (int k = 0; k < 3; ++k)
        if (k != i) acc += v(i, k) * g1(k, i);
      REQUIRE(std::abs(g1(i, i) + acc) < 1e-14);
    }
  }

  SECTION("vanishing residue gives the bare exponential") {
    const Cplx z(3.0, 55.0);
    Mat w = asymptotic_init(Mat::Zero(3, 3), u, z, 2);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const Cplx want = i == j ? std::exp(z * u(i)) : Cplx(0.0);
        REQUIRE(std::abs(w(i, j) - want) <= 1e-12 * std::abs(std::exp(z * u(i))));
      }
  }

  SECTION("order gap decays one power faster than the series scale") {
    // difference between order 1 and order 2 is the z^{-2} term: ratio 4 per
    // radius doubling
    double prev = 0.0;
    for (double r : {50.0, 100.0, 200.0}) {
      const Cplx z(0.0, r);
      const double d = max_abs(Mat(asymptotic_init(v, u, z, 1) -
                                   asymptotic_init(v, u, z, 2)));
      if (prev > 0.0) {
        REQUIRE(prev / d > 3.5);
        REQUIRE(prev / d < 4.5);
      }
      prev = d;
    }
  }

  SECTION("validity radius and argument checks") {
    REQUIRE_THROWS_AS(asymptotic_init(v, u, Cplx(0.0, 1e-3), 1),
                      ValidationError);
    REQUIRE_THROWS_AS(asymptotic_init(v, u, Cplx(0.0, 100.0), 3),
                      ValidationError);
    REQUIRE_THROWS_AS(gamma_coefficients(v, u, 0), ValidationError);
    REQUIRE_THROWS_AS(gamma_coefficients(v, Vec::Zero(2), 1), ValidationError);
  }
}

TEST_CASE("two-pole systems reproduce the closed form", "[monodromy]") {
  SECTION("trivial sizes") {
    auto r1 = compute_stokes(Mat::Zero(1, 1), point({Cplx(0.7)}));
    REQUIRE(r1.S.n() == 1);
    REQUIRE(r1.permutation == std::vector<int>{0});
    auto r2 = compute_stokes(Mat::Zero(2, 2), point({Cplx(0.0), Cplx(1.0)}));
    REQUIRE(std::abs(r2.S.upper()[0]) == 0.0);
  }

  SECTION("entry squared equals -4 sinh^2(pi v)") {
    for (double v2 : {0.05, -0.05, 0.1, -0.1, 0.2, -0.2, 0.3, -0.3}) {
      const Mat v = so::skew_from_upper(2, {Cplx(v2, 0.0)});
      auto res = compute_stokes(v, point({Cplx(0.0), Cplx(1.0)}));
      const Cplx s = res.S.upper()[0];
      const double sinh_pv = std::sinh(kPi * v2);
      REQUIRE(rel_err(s * s, Cplx(-4.0 * sinh_pv * sinh_pv)) < 1e-6);
      // real skew input makes the entry purely imaginary
      REQUIRE(std::abs(s.real()) < 1e-7 * std::abs(s));
      REQUIRE(res.triangularity_residual < 1e-6);
      REQUIRE(res.s_minus_residual < 1e-6);
      REQUIRE(res.spectral_residual < 1e-6);
    }
  }

  SECTION("the entry does not depend on the pole positions") {
    const Mat v = so::skew_from_upper(2, {Cplx(0.17, 0.0)});
    const Cplx a = compute_stokes(v, point({Cplx(0.0), Cplx(1.0)})).S.upper()[0];
    const Cplx b =
        compute_stokes(v, point({Cplx(-3.0), Cplx(1.7)})).S.upper()[0];
    REQUIRE(rel_err(b, a) < 1e-7);
  }
}

TEST_CASE("three-pole systems meet the diagnostics contract", "[monodromy]") {
  Rng rng(902);

  SECTION("random real systems") {
    for (int trial = 0; trial < 4; ++trial) {
      const Mat v = rng.skew_real(3, 0.3);
      so::DeformationPoint dp;
      dp.u = rng.real_poles(3);
      auto res = compute_stokes(v, dp);
      CAPTURE(trial);
      REQUIRE(res.triangularity_residual < 1e-6);
      REQUIRE(res.s_minus_residual < 1e-6);
      REQUIRE(res.spectral_residual < 1e-6);
      REQUIRE(res.spectral_residual ==
              Catch::Approx(spectral_check(res.S, v)).margin(1e-9));
    }
  }

  const Mat v = so::skew_from_upper(
      3, {Cplx(0.21, 0.0), Cplx(-0.13, 0.0), Cplx(0.17, 0.0)});
  const auto dp = point({Cplx(0.3), Cplx(1.4), Cplx(2.6)});
  const auto base = compute_stokes(v, dp);

  SECTION("doubling the matching radius leaves S fixed") {
    IntegratorConfig cfg;
    cfg.matching_radius = 2.0 * base.matching_radius;
    auto res = compute_stokes(v, dp, cfg);
    REQUIRE(max_upper_diff(res.S, base.S) < 1e-6);
  }

  SECTION("relabelling the poles relabels nothing downstream") {
    const std::vector<int> p{2, 0, 1};
    so::DeformationPoint dpp;
    dpp.u = Vec(3);
    Mat vp(3, 3);
    for (int a = 0; a < 3; ++a) {
      dpp.u(a) = dp.u(p[a]);
      for (int b = 0; b < 3; ++b) vp(a, b) = v(p[a], p[b]);
    }
    auto res = compute_stokes(vp, dpp);
    REQUIRE(max_upper_diff(res.S, base.S) < 1e-10);
    // the permutation must undo the relabelling: position k holds the pole
    // with k-th smallest real part
    for (int k = 0; k < 3; ++k)
      REQUIRE(dpp.u(res.permutation[k]) == dp.u(base.permutation[k]));
  }

  SECTION("rotating the line and the poles together changes nothing") {
    const double psi = 0.6;
    const Cplx back(std::cos(-psi), std::sin(-psi));
    so::DeformationPoint dpr;
    dpr.u = Vec(3);
    for (int k = 0; k < 3; ++k) dpr.u(k) = back * dp.u(k);
    dpr.psi = psi;
    auto res = compute_stokes(v, dpr);
    REQUIRE(max_upper_diff(res.S, base.S) < 1e-9);
  }

  SECTION("guards") {
    REQUIRE_THROWS_AS(compute_stokes(v, point({Cplx(0.0), Cplx(0.0), Cplx(1.0)})),
                      DegenerateInputError);
    // equal real parts at psi = 0: the matching direction cannot separate them
    REQUIRE_THROWS_AS(
        compute_stokes(v, point({Cplx(0.0), Cplx(0.0, 1.0), Cplx(1.0)})),
        DegenerateInputError);
    // resonant spectrum: eigenvalues +-1/2 differ by an integer
    const Mat vres = so::skew_from_upper(2, {Cplx(0.0, -0.5)});
    REQUIRE_THROWS_AS(compute_stokes(vres, point({Cplx(0.0), Cplx(1.0)})),
                      DegenerateInputError);
    // admissible but far from collinear: transport would amplify the series
    // error beyond the diagnostics budget
    REQUIRE_THROWS_AS(
        compute_stokes(v, point({Cplx(0.0), Cplx(1.0, 0.5), Cplx(2.2)})),
        AccuracyError);
    IntegratorConfig tiny;
    tiny.matching_radius = 5.0;
    REQUIRE_THROWS_AS(compute_stokes(v, dp, tiny), ValidationError);
    REQUIRE_THROWS_AS(compute_stokes(v, point({Cplx(0.0), Cplx(1.0)})),
                      ValidationError);
  }
}

TEST_CASE("spectral constraint check", "[monodromy]") {
  SECTION("identity matches the zero residue") {
    REQUIRE(spectral_check(StokesMatrix::identity(3), Mat::Zero(3, 3)) <
            1e-12);
  }

  SECTION("detects a mismatched pair") {
    const Mat v = so::skew_from_upper(2, {Cplx(0.2, 0.0)});
    auto res = compute_stokes(v, point({Cplx(0.0), Cplx(1.0)}));
    REQUIRE(spectral_check(res.S, v) < 1e-6);
    const Mat off = so::skew_from_upper(2, {Cplx(0.35, 0.0)});
    REQUIRE(spectral_check(res.S, off) > 1e-2);
  }
}

TEST_CASE("pole loop generators", "[monodromy]") {
  SECTION("zero residue: reflections through the coordinate axes") {
    const Vec u = point({Cplx(0.0), Cplx(1.1), Cplx(2.3)}).u;
    auto M = fuchsian_loop_monodromy(Mat::Zero(3, 3), u, Cplx(0.9, -1.2));
    REQUIRE(M.size() == 3);
    for (int k = 0; k < 3; ++k) {
      Mat want = Mat::Identity(3, 3);
      want(k, k) = Cplx(-1.0);
      REQUIRE(max_abs(Mat(M[k] - want)) < 1e-8);
    }
  }

  SECTION("pair traces and total spectrum match the Stokes matrix") {
    const Mat v = so::skew_from_upper(
        3, {Cplx(0.21, 0.0), Cplx(-0.13, 0.0), Cplx(0.17, 0.0)});
    const auto dp = point({Cplx(0.3), Cplx(1.4), Cplx(2.6)});
    const auto res = compute_stokes(v, dp);
    auto M = fuchsian_loop_monodromy(v, dp.u, Cplx(1.2, -1.5));
    const auto su = res.S.upper();
    const std::array<std::pair<int, int>, 3> pairs{
        {{0, 1}, {0, 2}, {1, 2}}};
    const std::array<Cplx, 3> s{su[0], su[1], su[2]};
    for (int k = 0; k < 3; ++k) {
      const auto [i, j] = pairs[k];
      const Cplx tr = (M[i] * M[j]).trace();
      REQUIRE(std::abs(tr - (Cplx(-1.0) + s[k] * s[k])) < 1e-5);
      REQUIRE(max_abs(Mat(M[i] * M[i] - Mat::Identity(3, 3))) < 1e-8);
      REQUIRE(std::abs((M[k]).trace() - Cplx(1.0)) < 1e-7);
    }
    const Mat prod = M[0] * M[1] * M[2];
    const Mat smat = res.S.matrix();
    const Mat cox = -smat.partialPivLu().solve(smat.transpose().eval());
    REQUIRE(matching_distance(eigen(prod).values, eigen(cox).values) < 1e-5);
  }

  SECTION("geometry guards") {
    const Mat v = so::skew_from_upper(
        3, {Cplx(0.1, 0.0), Cplx(0.1, 0.0), Cplx(0.1, 0.0)});
    const Vec u = point({Cplx(0.0), Cplx(1.0), Cplx(2.0)}).u;
    REQUIRE_THROWS_AS(fuchsian_loop_monodromy(v, u, Cplx(0.5, 1.0)),
                      ValidationError);
    REQUIRE_THROWS_AS(fuchsian_loop_monodromy(v, u, Cplx(1.0, -0.05)),
                      ValidationError);
    const Vec tilted = point({Cplx(0.0), Cplx(1.0, 0.4), Cplx(2.0)}).u;
    REQUIRE_THROWS_AS(fuchsian_loop_monodromy(v, tilted, Cplx(0.5, -1.0)),
                      ValidationError);
  }
}

TEST_CASE("pushforward of the linear bracket", "[monodromy]") {
  SECTION("a single coordinate has no pairs") {
    const Mat v = so::skew_from_upper(2, {Cplx(0.15, 0.0)});
    auto t = pushforward_bracket(v, point({Cplx(0.0), Cplx(1.0)}));
    REQUIRE(t.n == 2);
    REQUIRE(t.entries.empty());
  }

  const Mat v = so::skew_from_upper(
      3, {Cplx(0.17, 0.0), Cplx(-0.21, 0.0), Cplx(0.13, 0.0)});
  const auto dp = point({Cplx(0.0), Cplx(0.9), Cplx(2.1)});

  SECTION("lands on the quadratic bracket at coupling 2 pi i") {
    auto t = pushforward_bracket(v, dp);
    REQUIRE(t.kappa == Cplx(0.0, 2.0 * kPi));
    const auto s = compute_stokes(v, dp).S;
    const auto want = bracket::bracket_table(s, Cplx(0.0, 2.0 * kPi));
    const auto half = bracket::bracket_table(s, Cplx(0.0, kPi));
    for (int p = 0; p < 3; ++p)
      for (int q = p + 1; q < 3; ++q) {
        REQUIRE(rel_err(t.value(p, q), want.value(p, q)) < 1e-3);
        // the coupling is a measured fact: half of it does not fit
        REQUIRE(rel_err(t.value(p, q), half.value(p, q)) > 0.5);
      }
  }

  SECTION("stable under step halving") {
    auto t1 = pushforward_bracket(v, dp, {}, 1e-5);
    auto t2 = pushforward_bracket(v, dp, {}, 0.5e-5);
    for (int p = 0; p < 3; ++p)
      for (int q = p + 1; q < 3; ++q)
        REQUIRE(rel_err(t2.value(p, q), t1.value(p, q)) < 1e-4);
  }
}
