#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "stokes/common.hpp"

namespace stokes {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline bool all_finite(const Mat& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag()))
        return false;
  return true;
}

inline void require_square_finite(const Mat& m, const char* who) {
  require(m.rows() == m.cols(), std::string(who) + ": matrix must be square");
  require(m.rows() >= 1, std::string(who) + ": empty matrix");
  require(all_finite(m), std::string(who) + ": non-finite entry");
}

inline double max_abs(const Mat& m) {
  double r = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) r = std::max(r, std::abs(m(i, j)));
  return r;
}

// Coefficients of det(mu*I - m), monic, leading first: [1, c_1, ..., c_n].
// Faddeev-LeVerrier up to n = 8; for larger n the recursion loses precision,
// so the coefficients are re-expanded from the eigenvalues instead (the
// solver reduces to Hessenberg/Schur form internally).
inline std::vector<Cplx> char_poly(const Mat& m) {
  require_square_finite(m, "char_poly");
  const int n = static_cast<int>(m.rows());
  std::vector<Cplx> c(static_cast<size_t>(n) + 1, Cplx(0.0));
  c[0] = Cplx(1.0);
  if (n <= 8) {
    Mat mk = m;
    for (int k = 1; k <= n; ++k) {
      c[static_cast<size_t>(k)] = -mk.trace() / static_cast<double>(k);
      if (k < n) mk = m * (mk + c[static_cast<size_t>(k)] * Mat::Identity(n, n));
    }
    return c;
  }
  Eigen::ComplexEigenSolver<Mat> es(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw AccuracyError("char_poly: eigenvalue iteration failed");
  // Expand prod_k (mu - lam_k), coefficients kept constant-term-first.
  std::vector<Cplx> p{Cplx(1.0)};
  for (int k = 0; k < n; ++k) {
    const Cplx lam = es.eigenvalues()(k);
    std::vector<Cplx> next(p.size() + 1, Cplx(0.0));
    for (size_t j = 0; j < p.size(); ++j) {
      next[j] += -lam * p[j];
      next[j + 1] += p[j];
    }
    p = std::move(next);
  }
  std::reverse(p.begin(), p.end());
  return p;
}

struct EigenResult {
  Vec values;       // sorted by (Re, Im) lexicographically
  Mat vectors;      // unit-norm columns, same order as values
  double residual;  // ||m*vectors - vectors*diag(values)||_F
  double vec_rcond; // reciprocal condition of the eigenvector matrix
};

// Dense complex eigendecomposition with an explicit quality report.
// Defective or near-defective input is not silently accepted: the residual
// stays small but vec_rcond collapses, and callers gate on it.
inline EigenResult eigen(const Mat& m) {
  require_square_finite(m, "eigen");
  const int n = static_cast<int>(m.rows());
  Eigen::ComplexEigenSolver<Mat> es(m, /*computeEigenvectors=*/true);
  if (es.info() != Eigen::Success)
    throw AccuracyError("eigen: iteration failed to converge");
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const Vec& vals = es.eigenvalues();
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const Cplx va = vals(a), vb = vals(b);
    if (va.real() != vb.real()) return va.real() < vb.real();
    return va.imag() < vb.imag();
  });
  EigenResult r;
  r.values = Vec(n);
  r.vectors = Mat(n, n);
  for (int k = 0; k < n; ++k) {
    r.values(k) = vals(order[static_cast<size_t>(k)]);
    Vec col = es.eigenvectors().col(order[static_cast<size_t>(k)]);
    r.vectors.col(k) = col / col.norm();
  }
  r.residual = (m * r.vectors - r.vectors * r.values.asDiagonal()).norm();
  Eigen::JacobiSVD<Mat> svd(r.vectors);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(n - 1);
  r.vec_rcond = (smax > 0.0) ? smin / smax : 0.0;
  const double scale = std::max(1.0, m.norm());
  if (r.residual > 1e-10 * scale)
    throw AccuracyError("eigen: residual above bound", r.residual);
  return r;
}

struct InvertResult {
  Mat inverse;
  double rcond;  // reciprocal condition estimate from the LU factorization
};

inline InvertResult invert(const Mat& m, double min_rcond = 1e-13) {
  require_square_finite(m, "invert");
  // LU rcond estimates are unreliable on (near-)singular input; at the sizes
  // this library targets an SVD-based estimate is cheap and trustworthy.
  Eigen::JacobiSVD<Mat> svd(m);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(m.rows() - 1);
  InvertResult r;
  r.rcond = (smax > 0.0) ? smin / smax : 0.0;
  if (!(r.rcond > min_rcond))
    throw DegenerateInputError("invert: singular within tolerance, rcond = " +
                               std::to_string(r.rcond));
  r.inverse = Eigen::PartialPivLU<Mat>(m).inverse();
  return r;
}

// Optimal-assignment Chebyshev distance between two spectra. Exact search for
// n <= 8 (the sizes this library targets), greedy beyond that.
inline double matching_distance(const Vec& a, const Vec& b) {
  require(a.size() == b.size(), "matching_distance: size mismatch");
  const int n = static_cast<int>(a.size());
  std::vector<int> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  if (n <= 8) {
    double best = std::numeric_limits<double>::infinity();
    do {
      double worst = 0.0;
      for (int i = 0; i < n; ++i)
        worst = std::max(worst, std::abs(a(i) - b(perm[static_cast<size_t>(i)])));
      best = std::min(best, worst);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
  }
  std::vector<bool> used(static_cast<size_t>(n), false);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    int arg = -1;
    double dmin = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      if (used[static_cast<size_t>(j)]) continue;
      const double d = std::abs(a(i) - b(j));
      if (d < dmin) { dmin = d; arg = j; }
    }
    used[static_cast<size_t>(arg)] = true;
    worst = std::max(worst, dmin);
  }
  return worst;
}

inline Cplx eval_poly(const std::vector<Cplx>& leading_first, Cplx x) {
  Cplx acc(0.0);
  for (const Cplx& c : leading_first) acc = acc * x + c;
  return acc;
}

}  // namespace stokes
