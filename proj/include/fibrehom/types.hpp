#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace fibrehom {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Malformed shapes, out-of-range parameters, unparsable input.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A fibre or coefficient violates a structural assumption (accretivity,
/// restricted invertibility, source admissibility).
class HypothesisError : public std::runtime_error {
 public:
  HypothesisError(const std::string& what, double measured)
      : std::runtime_error(what), measured_(measured) {}
  double measured() const { return measured_; }

 private:
  double measured_;
};

class CoercivityError : public HypothesisError {
 public:
  using HypothesisError::HypothesisError;
};

struct Tolerances {
  double sym = 1e-10;   // skew-Hermitian / commutation residuals
  double orth = 1e-10;  // orthonormality of N basis
  double num = 1e-8;    // absolute slack on measured-vs-bound comparisons
};

}  // namespace fibrehom
