#include <catch2/catch_amalgamated.hpp>

#include "stokes/ode.hpp"
#include "stokes/rng.hpp"

using namespace stokes;
using namespace stokes::ode;

TEST_CASE("scalar exponential") {
  auto rhs = [](double, const Vec& y) -> Vec { return y; };
  Vec y0(1);
  y0 << Cplx(1.0, 0.0);
  Vec y = integrate(rhs, 0.0, 1.0, y0, {});
  CHECK(std::abs(y(0) - std::exp(Cplx(1.0))) < 1e-12);
}

TEST_CASE("constant-coefficient matrix system along a straight path") {
  // dY/dz = U Y with diagonal U, straight path: Y = exp(z1 U) exactly
  Mat u = Mat::Zero(3, 3);
  u(0, 0) = Cplx(0.3, 0.1);
  u(1, 1) = Cplx(-0.2, 0.4);
  u(2, 2) = Cplx(0.0, -0.5);
  Path path{Segment{Cplx(0.0), Cplx(1.5, -0.7)}};
  Mat y = integrate_linear([&](Cplx) { return u; }, path, Mat::Identity(3, 3));
  const Cplx z1(1.5, -0.7);
  for (int i = 0; i < 3; ++i)
    CHECK(std::abs(y(i, i) - std::exp(z1 * u(i, i))) < 1e-12);
  CHECK(std::abs(y(0, 1)) < 1e-13);
}

TEST_CASE("winding number: rhs 1/z around the full circle") {
  // d log Y = dz/z around |z| = 2 accumulates 2*pi*i
  Path path{CircArc{Cplx(0.0), 2.0, 0.0, 2.0 * kPi}};
  Mat y0 = Mat::Identity(1, 1);
  Mat y = integrate_linear([](Cplx z) { Mat a(1, 1); a(0, 0) = 1.0 / z; return a; },
                           path, y0);
  CHECK(std::abs(y(0, 0) - std::exp(Cplx(0.0, 2.0 * kPi))) < 1e-12);
  CHECK(std::abs(y(0, 0) - Cplx(1.0)) < 1e-12);
}

TEST_CASE("tolerance scaling") {
  auto rhs = [](double t, const Vec& y) -> Vec {
    Vec d(y.size());
    d(0) = Cplx(std::cos(3.0 * t), std::sin(2.0 * t)) * y(0);
    return d;
  };
  Vec y0(1);
  y0 << Cplx(1.0);
  OdeOptions loose{1e-6, 1e-6};
  OdeOptions tight{1e-12, 1e-12};
  Vec a = integrate(rhs, 0.0, 3.0, y0, loose);
  Vec b = integrate(rhs, 0.0, 3.0, y0, tight);
  // the tight run is the reference; loose should sit within ~1e-4
  CHECK(std::abs(a(0) - b(0)) < 1e-4);
  CHECK(std::abs(a(0) - b(0)) > 1e-14);  // and they must not be identical
}

TEST_CASE("step accounting and limits") {
  auto rhs = [](double, const Vec& y) -> Vec { return y; };
  Vec y0(1);
  y0 << Cplx(1.0);
  OdeStats st;
  OdeOptions opt;
  opt.max_step = 1e-3;
  integrate(rhs, 0.0, 1.0, y0, opt, &st);
  CHECK(st.accepted >= 1000);
  OdeOptions bad;
  bad.rel_tol = 1.0;  // outside the documented (1e-14, 1e-2) window
  CHECK_THROWS_AS(integrate(rhs, 0.0, 1.0, y0, bad), ValidationError);
}
