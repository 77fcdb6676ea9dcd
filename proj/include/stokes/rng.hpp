#pragma once

#include <random>

#include "stokes/linalg.hpp"

namespace stokes {

// Deterministic generators used by tests and the CLI verify command.
// Identical seeds produce identical draws; all sampling happens on one
// thread so worker counts never change outputs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(eng_);
  }

  // Uniform on the complex disc |z| <= radius.
  Cplx disc(double radius) {
    const double r = radius * std::sqrt(uniform(0.0, 1.0));
    const double th = uniform(0.0, 2.0 * kPi);
    return Cplx(r * std::cos(th), r * std::sin(th));
  }

  // Real skew-symmetric matrix with entries in [-bound, bound].
  Mat skew_real(int n, double bound) {
    Mat v = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        v(i, j) = Cplx(uniform(-bound, bound), 0.0);
        v(j, i) = -v(i, j);
      }
    return v;
  }

  // Complex skew-symmetric (V^T = -V, not Hermitian) matrix, entries in a disc.
  Mat skew_complex(int n, double radius) {
    Mat v = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        v(i, j) = disc(radius);
        v(j, i) = -v(i, j);
      }
    return v;
  }

  // Upper unitriangular matrix with strictly-upper entries in a disc.
  Mat unitriangular_complex(int n, double radius) {
    Mat s = Mat::Identity(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) s(i, j) = disc(radius);
    return s;
  }

  // Upper unitriangular with real strictly-upper entries in [-band, band].
  Mat unitriangular_real(int n, double band) {
    Mat s = Mat::Identity(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) s(i, j) = Cplx(uniform(-band, band), 0.0);
    return s;
  }

  // Real strictly increasing u with gaps in [1, 1+jitter]; admissible for
  // psi = 0 by construction.
  Vec real_poles(int n, double jitter = 0.5) {
    Vec u(n);
    double x = uniform(-0.5, 0.5);
    for (int i = 0; i < n; ++i) {
      u(i) = Cplx(x, 0.0);
      x += 1.0 + uniform(0.0, jitter);
    }
    return u;
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace stokes
