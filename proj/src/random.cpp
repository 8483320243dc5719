#include "fibrehom/random.hpp"

namespace fibrehom {

CMatrix Rng::gaussian(Index rows, Index cols) {
  CMatrix out(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) out(i, j) = complex_normal();
  }
  return out;
}

CVector Rng::gaussian(Index rows) {
  CVector out(rows);
  for (Index i = 0; i < rows; ++i) out(i) = complex_normal();
  return out;
}

CMatrix Rng::unitary(Index dim) {
  Eigen::HouseholderQR<CMatrix> qr(gaussian(dim, dim));
  return qr.householderQ() * CMatrix::Identity(dim, dim);
}

}  // namespace fibrehom
