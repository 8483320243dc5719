#pragma once

// Independent reference computations for the unit tests. Nothing here calls
// into the library's numerics beyond plain Eigen.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Orthogonal projector onto range(b) through the Gram matrix.
inline CMatrix gram_projector(const CMatrix& b) {
  const CMatrix gram = b.adjoint() * b;
  return b * gram.fullPivLu().solve(b.adjoint());
}

/// Largest singular value from a full Jacobi SVD.
inline double norm2(const CMatrix& x) {
  if (x.size() == 0) return 0.0;
  return Eigen::JacobiSVD<CMatrix>(x).singularValues()(0);
}

inline double min_singular(const CMatrix& x) {
  const auto sv = Eigen::JacobiSVD<CMatrix>(x).singularValues();
  return sv(sv.size() - 1);
}

/// (int_0^1 1/a)^{-1} by the midpoint rule.
inline double harmonic_mean(const std::function<double(double)>& a, int points = 4096) {
  double acc = 0.0;
  for (int i = 0; i < points; ++i) acc += 1.0 / a((i + 0.5) / points);
  return points / acc;
}

/// Minimum over a sampled grid of the smallest eigenvalue of Re a(y).
inline double sampled_min_eig(const std::function<CMatrix(const std::vector<double>&)>& a, int d, int per_axis) {
  double lo = std::numeric_limits<double>::infinity();
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  while (true) {
    std::vector<double> y(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) y[static_cast<std::size_t>(j)] = static_cast<double>(idx[static_cast<std::size_t>(j)]) / per_axis;
    const CMatrix v = a(y);
    const CMatrix h = 0.5 * (v + v.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    lo = std::min(lo, es.eigenvalues()(0));
    int j = 0;
    while (j < d && ++idx[static_cast<std::size_t>(j)] == per_axis) idx[static_cast<std::size_t>(j++)] = 0;
    if (j == d) break;
  }
  return lo;
}

/// Fourier coefficient int_cell g(y) e^{-2 pi i w.y} dy of a sampled
/// periodic function by the uniform rule with `per_axis` points; exact for
/// trigonometric polynomials whose frequencies differ from w by less than
/// per_axis in every coordinate.
inline CMatrix fourier_coefficient(const std::function<CMatrix(const std::vector<double>&)>& g, int d,
                                   const std::vector<int>& w, int per_axis) {
  CMatrix acc;
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  long count = 0;
  while (true) {
    std::vector<double> y(static_cast<std::size_t>(d));
    double phase = 0.0;
    for (int j = 0; j < d; ++j) {
      y[static_cast<std::size_t>(j)] = static_cast<double>(idx[static_cast<std::size_t>(j)]) / per_axis;
      phase += w[static_cast<std::size_t>(j)] * y[static_cast<std::size_t>(j)];
    }
    const CMatrix v = g(y) * std::exp(Complex(0.0, -2.0 * std::numbers::pi * phase));
    if (acc.size() == 0) {
      acc = v;
    } else {
      acc += v;
    }
    ++count;
    int j = 0;
    while (j < d && ++idx[static_cast<std::size_t>(j)] == per_axis) idx[static_cast<std::size_t>(j++)] = 0;
    if (j == d) break;
  }
  return acc / static_cast<double>(count);
}

/// Inverse of a 2x2 block matrix [[p, q], [r, s]] through the Schur
/// complement of p.
inline CMatrix block_inverse(const CMatrix& p, const CMatrix& q, const CMatrix& r, const CMatrix& s) {
  const CMatrix pi = p.inverse();
  const CMatrix schur = s - r * pi * q;
  const CMatrix si = schur.inverse();
  const Eigen::Index m = p.rows(), k = s.rows();
  CMatrix out(m + k, m + k);
  out.topLeftCorner(m, m) = pi + pi * q * si * r * pi;
  out.topRightCorner(m, k) = -pi * q * si;
  out.bottomLeftCorner(k, m) = -si * r * pi;
  out.bottomRightCorner(k, k) = si;
  return out;
}

inline double rel(const CMatrix& x, const CMatrix& y) {
  return (x - y).norm() / std::max(y.norm(), 1e-300);
}

}  // namespace oracle
