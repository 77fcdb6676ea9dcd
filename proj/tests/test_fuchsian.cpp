#include <catch2/catch_amalgamated.hpp>

#include "stokes/fuchsian.hpp"
#include "stokes/rng.hpp"

using namespace stokes;
using namespace stokes::fuchsian;

namespace {

std::vector<Mat> random_tuple(Rng& rng, int n, int dim, double radius) {
  std::vector<Mat> out;
  for (int i = 0; i < n; ++i) {
    Mat m(dim, dim);
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b) m(a, b) = rng.disc(radius);
    out.push_back(m);
  }
  return out;
}

}  // namespace

TEST_CASE("residues_from_V structure") {
  SECTION("V = 0, n = 2") {
    const auto t = residues_from_V(Mat::Zero(2, 2));
    Mat b1(2, 2), b2(2, 2);
    b1 << -0.5, 0, 0, 0;
    b2 << 0, 0, 0, -0.5;
    CHECK(max_abs(Mat(t.B[0] - b1)) == 0.0);
    CHECK(max_abs(Mat(t.B[1] - b2)) == 0.0);
    CHECK(max_abs(Mat(t.B_inf - 0.5 * Mat::Identity(2, 2))) == 0.0);
  }
  SECTION("single nonzero row and exact sum") {
    Rng rng(31);
    const Mat v = rng.skew_complex(5, 2.0);
    const auto t = residues_from_V(v);
    Mat total = t.B_inf;
    for (int i = 0; i < 5; ++i) {
      const Mat& b = t.B[static_cast<size_t>(i)];
      for (int a = 0; a < 5; ++a)
        for (int c = 0; c < 5; ++c) {
          const Cplx want =
              (a == i) ? -(v(a, c) + (a == c ? Cplx(0.5) : Cplx(0.0))) : Cplx(0.0);
          CHECK(b(a, c) == want);
        }
      total += b;
    }
    CHECK(max_abs(total) == 0.0);
    t.validate();
  }
  SECTION("rank one with spectrum {-1/2, 0, ...}") {
    Rng rng(32);
    const int n = 4;
    const Mat v = rng.skew_complex(n, 2.0);
    const auto t = residues_from_V(v);
    for (const Mat& b : t.B) {
      Eigen::JacobiSVD<Mat> svd(b);
      CHECK(svd.singularValues()(1) < 1e-13 * svd.singularValues()(0));
      const auto cp = char_poly(b);  // mu^n + 1/2 mu^{n-1}
      CHECK(std::abs(cp[1] - Cplx(0.5)) < 1e-12);
      for (int k = 2; k <= n; ++k) CHECK(std::abs(cp[static_cast<size_t>(k)]) < 1e-12);
    }
  }
}

TEST_CASE("trace identities of the rank-one residues") {
  // n=3, v12=1, v13=3, v23=2: Tr(B1B2B3) = -v12 v23 v31 = +6
  {
    const Mat v = so::skew_from_upper(3, {Cplx(1.0), Cplx(3.0), Cplx(2.0)});
    const auto t = residues_from_V(v);
    const Cplx tr = (t.B[0] * t.B[1] * t.B[2]).trace();
    CHECK(std::abs(tr - Cplx(6.0)) < 1e-13);
  }
  Rng rng(33);
  for (int n = 3; n <= 6; ++n) {
    const Mat v = rng.skew_complex(n, 1.5);
    const auto t = residues_from_V(v);
    const double s = 1.0 + max_abs(v);
    const double tol2 = 1e-13 * s * s, tol3 = 1e-12 * s * s * s;
    for (int i = 0; i < n; ++i) {
      CHECK(std::abs(t.B[static_cast<size_t>(i)].trace() - Cplx(-0.5)) < 1e-13);
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        // pair trace
        const Cplx tr2 = (t.B[static_cast<size_t>(i)] * t.B[static_cast<size_t>(j)]).trace();
        CHECK(std::abs(tr2 + v(i, j) * v(i, j)) < tol2);
        // trace against V: sum_{k != i,j} v_ij v_ki v_jk - v_ij^2/2
        Cplx want = -0.5 * v(i, j) * v(i, j);
        for (int k = 0; k < n; ++k)
          if (k != i && k != j) want += v(i, j) * v(k, i) * v(j, k);
        const Cplx trv = (t.B[static_cast<size_t>(i)] * t.B[static_cast<size_t>(j)] * v).trace();
        CHECK(std::abs(trv - want) < tol3);
        // triple traces
        for (int k = 0; k < n; ++k) {
          if (k == i || k == j) continue;
          const Cplx tr3 = (t.B[static_cast<size_t>(i)] * t.B[static_cast<size_t>(j)] *
                            t.B[static_cast<size_t>(k)])
                               .trace();
          CHECK(std::abs(tr3 + v(i, j) * v(j, k) * v(k, i)) < tol3);
        }
      }
    }
  }
}

TEST_CASE("gauge to diagonal frame") {
  SECTION("degenerate spectrum rejected") {
    const auto t = residues_from_V(Mat::Zero(3, 3));
    CHECK_THROWS_AS(gauge_to_A(t, Mat::Zero(3, 3)), DegenerateInputError);
  }
  SECTION("n=2 gauged residue at infinity") {
    const double vv = 0.7;
    const Mat v = so::skew_from_upper(2, {Cplx(vv)});
    const auto a = gauge_to_A(residues_from_V(v), v);
    Vec want(2);
    want << Cplx(0.5, vv), Cplx(0.5, -vv);
    CHECK(matching_distance(Vec(a.B_inf.diagonal()), want) < 1e-12);
  }
  SECTION("conjugation invariance of pair traces, diagonal A_inf") {
    Rng rng(34);
    const int n = 4;
    const Mat v = rng.skew_complex(n, 1.0);
    const auto b = residues_from_V(v);
    const auto a = gauge_to_A(b, v);
    a.validate();
    const Mat off = a.B_inf - Mat(a.B_inf.diagonal().asDiagonal());
    CHECK(max_abs(off) < 1e-9);
    const double s = 1.0 + max_abs(v);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Cplx ta = (a.B[static_cast<size_t>(i)] * a.B[static_cast<size_t>(j)]).trace();
        const Cplx tb = (b.B[static_cast<size_t>(i)] * b.B[static_cast<size_t>(j)]).trace();
        CHECK(std::abs(ta - tb) < 1e-12 * s * s);
      }
    // A_inf diagonal equals 1/2 + eigenvalues of V (same sort order)
    const auto ev = eigen(v);
    CHECK(matching_distance(Vec(a.B_inf.diagonal()),
                            Vec(ev.values.array() + Cplx(0.5))) < 1e-10);
  }
}

TEST_CASE("schlesinger right-hand side") {
  Rng rng(35);
  SECTION("commuting residues give zero") {
    std::vector<Mat> A;
    for (int i = 0; i < 3; ++i) {
      Vec d(3);
      d << rng.disc(1.0), rng.disc(1.0), rng.disc(1.0);
      A.push_back(Mat(d.asDiagonal()));
    }
    const Vec u = rng.real_poles(3);
    for (int j = 0; j < 3; ++j)
      for (const Mat& m : schlesinger_rhs(A, u, j)) CHECK(max_abs(m) == 0.0);
  }
  SECTION("derivatives sum to zero exactly; Euler step preserves the sum") {
    const auto A = random_tuple(rng, 4, 4, 1.5);
    const Vec u = rng.real_poles(4);
    for (int j = 0; j < 4; ++j) {
      const auto rhs = schlesinger_rhs(A, u, j);
      Mat total = Mat::Zero(4, 4);
      for (const Mat& m : rhs) total += m;
      CHECK(max_abs(total) < 1e-13);
      Mat sum_before = Mat::Zero(4, 4), sum_after = Mat::Zero(4, 4);
      for (int i = 0; i < 4; ++i) {
        sum_before += A[static_cast<size_t>(i)];
        sum_after += A[static_cast<size_t>(i)] + 0.01 * rhs[static_cast<size_t>(i)];
      }
      CHECK(max_abs(Mat(sum_after - sum_before)) < 1e-15);
    }
  }
  SECTION("coincident poles rejected") {
    const auto A = random_tuple(rng, 3, 3, 1.0);
    Vec u(3);
    u << Cplx(0.0), Cplx(1.0), Cplx(1.0);
    CHECK_THROWS_AS(schlesinger_rhs(A, u, 0), DegenerateInputError);
  }
}

TEST_CASE("formal residue-entry bracket") {
  SECTION("different residues commute") {
    for (auto [a, b, c, d] : std::vector<std::array<int, 4>>{
             {0, 0, 0, 0}, {0, 1, 1, 0}, {1, 2, 2, 1}})
      CHECK(gl_bracket(3, 0, {a, b}, 1, {c, d}).empty());
  }
  SECTION("fixed entries") {
    // same residue, entries (1,2),(2,1) in 1-based labels
    const auto t = gl_bracket(2, 0, {0, 1}, 0, {1, 0});
    const GlTermList want{{-1, {0, 0, 0}}, {+1, {0, 1, 1}}};
    CHECK(t == want);
    CHECK(gl_bracket(2, 0, {0, 0}, 0, {0, 0}).empty());
  }
  SECTION("antisymmetry as term lists") {
    Rng rng(36);
    for (int rep = 0; rep < 40; ++rep) {
      const int dim = 3;
      const int i = rep % 2, j = (rep / 2) % 2;
      std::pair<int, int> e1{static_cast<int>(rng.engine()() % 3),
                             static_cast<int>(rng.engine()() % 3)};
      std::pair<int, int> e2{static_cast<int>(rng.engine()() % 3),
                             static_cast<int>(rng.engine()() % 3)};
      auto fwd = gl_bracket(dim, i, e1, j, e2);
      auto bwd = gl_bracket(dim, j, e2, i, e1);
      for (auto& term : bwd) term.first = -term.first;
      CHECK(fwd == gl_canonical(std::move(bwd)));
    }
  }
}

TEST_CASE("hamiltonian flow equals the Schlesinger form") {
  Rng rng(37);
  for (int rep = 0; rep < 3; ++rep) {
    const int n = 3;
    const auto A = random_tuple(rng, n, n, 1.5);
    const Vec u = rng.real_poles(n);
    double s = 1.0;
    for (const Mat& m : A) s = std::max(s, max_abs(m));
    const auto tol = 1e-12 * s * s;
    for (int j = 0; j < n; ++j) {
      const auto sch = schlesinger_rhs(A, u, j);
      for (int i = 0; i < n; ++i)
        CHECK(max_abs(Mat(hamiltonian_flow(A, u, j, i) - sch[static_cast<size_t>(i)])) <
              tol);
    }
  }
}

TEST_CASE("pair-trace brackets match the skew-side bracket with constant -1/2") {
  Rng rng(38);
  int points = 0;
  for (int n = 3; n <= 6; ++n) {
    for (int rep = 0; rep < 25; ++rep) {
      const Mat v = rng.skew_complex(n, 1.2);
      const auto t = residues_from_V(v);
      const double s = 1.0 + max_abs(v);
      const double tol = 1e-11 * s * s * s * s;
      // one shared-index pattern and one disjoint pattern per point
      const int i = 0, k = 1, j = 1, l = (n > 2) ? 2 : 1;
      const Cplx lhs = trace_pair_bracket(t.B, i, k, j, l);
      const Cplx rhs = 4.0 * v(i, k) * v(j, l) *
                       so::so_bracket_eval(v, {std::min(i, k), std::max(i, k)},
                                           {std::min(j, l), std::max(j, l)});
      CHECK(std::abs(lhs + 0.5 * rhs) < tol);
      if (n >= 4) {
        const Cplx dis = trace_pair_bracket(t.B, 0, 1, 2, 3);
        CHECK(std::abs(dis) < tol);
      }
      ++points;
    }
  }
  CHECK(points == 100);
}

TEST_CASE("connection bracket evaluation routes agree") {
  Rng rng(39);
  SECTION("zero connection and commuting entries") {
    std::vector<Mat> zero(3, Mat::Zero(3, 3));
    const Vec u = rng.real_poles(3);
    CHECK(connection_bracket(zero, u, Cplx(5.0, 1.0), Cplx(-2.0, 0.5), {0, 1},
                             {1, 2}) == Cplx(0.0));
    const auto A = random_tuple(rng, 3, 3, 1.0);
    // diagonal entry functions commute: structure constants vanish
    CHECK(connection_bracket(A, u, Cplx(4.0, 1.0), Cplx(-1.0, 2.0), {0, 0},
                             {1, 1}) == Cplx(0.0));
  }
  SECTION("random tuples, mutual agreement") {
    for (int rep = 0; rep < 50; ++rep) {
      const auto A = random_tuple(rng, 3, 3, 1.5);
      const Vec u = rng.real_poles(3);
      const Cplx mu = Cplx(3.0, 0.0) + rng.disc(1.0), nu = Cplx(-2.0, 0.0) + rng.disc(1.0);
      std::pair<int, int> e1{static_cast<int>(rng.engine()() % 3),
                             static_cast<int>(rng.engine()() % 3)};
      std::pair<int, int> e2{static_cast<int>(rng.engine()() % 3),
                             static_cast<int>(rng.engine()() % 3)};
      const Cplx d = connection_bracket_direct(A, u, mu, nu, e1, e2);
      const Cplx r = connection_bracket_rmatrix(A, u, mu, nu, e1, e2);
      CHECK(std::abs(d - r) < 1e-10 * (1.0 + std::abs(d)));
      connection_bracket(A, u, mu, nu, e1, e2);
    }
  }
  SECTION("pole and coincidence rejection") {
    const auto A = random_tuple(rng, 3, 3, 1.0);
    const Vec u = rng.real_poles(3);
    CHECK_THROWS_AS(connection_bracket(A, u, u(0), Cplx(9.0), {0, 1}, {1, 2}),
                    DegenerateInputError);
    CHECK_THROWS_AS(connection_bracket(A, u, Cplx(9.0), Cplx(9.0), {0, 1}, {1, 2}),
                    DegenerateInputError);
  }
}

TEST_CASE("fuchsian hamiltonian and its pullback factor") {
  Rng rng(40);
  SECTION("vanishes on zero-trace tuples") {
    std::vector<Mat> A;
    for (int i = 0; i < 3; ++i) {
      Mat m = Mat::Zero(2, 2);
      m(0, 1) = rng.disc(1.0);
      A.push_back(m);
    }
    Vec u(3);
    u << Cplx(0.0), Cplx(1.0), Cplx(2.5);
    for (int j = 0; j < 3; ++j) CHECK(fuchsian_hamiltonian(A, u, j) == Cplx(0.0));
  }
  SECTION("n=2 closed form") {
    const Cplx vv(0.4, 0.1);
    const Mat v = so::skew_from_upper(2, {vv});
    Vec u(2);
    u << Cplx(0.0), Cplx(1.7);
    const auto t = residues_from_V(v);
    const Cplx h0 = fuchsian_hamiltonian(t.B, u, 0);
    CHECK(std::abs(h0 - vv * vv / (u(0) - u(1))) < 1e-14);
  }
  SECTION("equals twice the skew-side hamiltonian") {
    for (int n = 2; n <= 5; ++n) {
      const Mat v = rng.skew_complex(n, 1.5);
      const Vec u = rng.real_poles(n);
      const auto t = residues_from_V(v);
      const double s = 1.0 + max_abs(v);
      for (int j = 0; j < n; ++j)
        CHECK(std::abs(fuchsian_hamiltonian(t.B, u, j) -
                       2.0 * so::hamiltonian(v, u, j)) < 1e-12 * s * s);
    }
  }
}
