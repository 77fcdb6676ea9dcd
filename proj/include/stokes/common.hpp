#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace stokes {

using Cplx = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Default symbolic prefactor of the quadratic bracket: kappa = i*pi.
inline Cplx default_kappa() { return Cplx(0.0, kPi); }

// Error taxonomy. The CLI maps these onto its exit codes:
//   ValidationError -> 2, AccuracyError -> 3, DegenerateInputError -> 4.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input: dimension mismatches, bad indices, violated structural
// invariants (non-skew matrix, lower-triangle garbage, out-of-range config).
struct ValidationError : Error {
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// A computation ran but could not meet its accuracy contract.
struct AccuracyError : Error {
  double residual = 0.0;
  explicit AccuracyError(const std::string& msg, double r = 0.0)
      : Error(msg), residual(r) {}
};

// Structurally valid input on which the operation is undefined: coincident
// u_i, inadmissible line angle, resonant or repeated spectrum, singular
// matrix within tolerance.
struct DegenerateInputError : Error {
  explicit DegenerateInputError(const std::string& msg) : Error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

}  // namespace stokes
