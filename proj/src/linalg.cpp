#include "fibrehom/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fibrehom {

RVector singular_values(const CMatrix& x) {
  if (std::min(x.rows(), x.cols()) <= 16) return Eigen::JacobiSVD<CMatrix>(x).singularValues();
  // BDCSVD misplaces values on clustered spectra; the Gram route does not
  const CMatrix gram = x.cols() <= x.rows() ? CMatrix(x.adjoint() * x) : CMatrix(x * x.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(gram, Eigen::EigenvaluesOnly);
  const RVector ev = es.eigenvalues();
  RVector sv(ev.size());
  for (Index i = 0; i < ev.size(); ++i) sv(i) = std::sqrt(std::max(ev(ev.size() - 1 - i), 0.0));
  return sv;
}

double op_norm(const CMatrix& x) {
  if (x.size() == 0) return 0.0;
  return singular_values(x)(0);
}

double min_singular_value(const CMatrix& x) {
  if (x.size() == 0) return 0.0;
  const RVector sv = singular_values(x);
  return sv(sv.size() - 1);
}

CMatrix hermitian_part(const CMatrix& x) { return 0.5 * (x + x.adjoint()); }

double min_real_part(const CMatrix& x) {
  if (x.size() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(x), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

CMatrix orthonormal_complement(const CMatrix& basis) {
  const Index dim = basis.rows();
  const Index k = basis.cols();
  if (k == 0) return CMatrix::Identity(dim, dim);
  Eigen::HouseholderQR<CMatrix> qr(basis);
  CMatrix q = qr.householderQ() * CMatrix::Identity(dim, dim);
  return q.rightCols(dim - k);
}

double reciprocal_condition(const Eigen::PartialPivLU<CMatrix>& lu) {
  if (lu.rows() == 0) return 1.0;
  // rcond() reports garbage once a pivot is exactly zero
  const RVector pivots = lu.matrixLU().diagonal().cwiseAbs();
  if (!(pivots.maxCoeff() > 0.0)) return 0.0;
  return std::min(lu.rcond(), pivots.minCoeff() / pivots.maxCoeff());
}

CMatrix checked_inverse(const CMatrix& x, const std::string& what, double* cond_estimate) {
  if (x.rows() != x.cols()) throw InputError(what + ": matrix is not square");
  if (x.size() == 0) {
    if (cond_estimate) *cond_estimate = 1.0;
    return x;
  }
  Eigen::PartialPivLU<CMatrix> lu(x);
  const double rcond = reciprocal_condition(lu);
  if (!(rcond > 1e3 * std::numeric_limits<double>::epsilon())) {
    throw HypothesisError(what + ": numerically singular (rcond " + std::to_string(rcond) + ")",
                          rcond);
  }
  if (cond_estimate) *cond_estimate = 1.0 / rcond;
  return lu.inverse();
}

double max_abs(const CMatrix& x) { return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff(); }

double relative_gap(const CMatrix& x, const CMatrix& y) {
  const double denom = std::max(y.norm(), std::numeric_limits<double>::min());
  return (x - y).norm() / denom;
}

}  // namespace fibrehom
