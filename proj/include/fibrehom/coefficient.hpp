#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "fibrehom/fourier.hpp"
#include "fibrehom/types.hpp"

namespace fibrehom::fourier {

/// Band-limited periodic tensor a(y) = sum_w a^(w) e^{2 pi i w.y}, acting
/// on flattened C^{rows} (C^{n x d} row-major for the second-order tensor).
struct CoefficientField {
  int d = 1;
  int rows = 1;
  int cols = 1;
  std::map<LatticePoint, CMatrix> modes;
  double declared_nu = 1.0;
  bool real_valued = false;

  int bandwidth() const;
  bool is_constant() const;
  /// Zero block when w is absent.
  CMatrix mode(const LatticePoint& w) const;
  CMatrix evaluate(std::span<const double> y) const;
};

struct CoercivityReport {
  double measured_nu = 0.0;           // sampled min eigenvalue of Re a(y)
  std::vector<double> worst_point;    // where it is attained
  double sampled_sup_norm = 0.0;
};

/// Samples Re a(y) on a uniform grid of (4*bandwidth + 4)^d points. Throws
/// CoercivityError when the sampled minimum falls below declared_nu - tol,
/// InputError on shape problems or a broken reality constraint.
CoercivityReport validate_coefficient(const CoefficientField& coef, double tol = 1e-10);

CoefficientField constant_coefficient(int d, const CMatrix& value, double nu);

/// Random field of the given bandwidth with Re a >= nu by construction.
CoefficientField random_coefficient(std::uint64_t seed, int d, int size, int bandwidth, double nu,
                                    bool real_valued);

/// Lattice points carrying a nonzero block.
std::vector<LatticePoint> support(const CoefficientField& coef);

/// Galerkin matrix of multiplication by coef on the block: entry block
/// (z, w) is a^(z - w). coef must act on the per-mode component count,
/// which is either ms.components() or ms.components() * ms.dim().
CMatrix multiplication_matrix(const CoefficientField& coef, const ModeSet& ms);
CMatrix multiplication_matrix(const CoefficientField& coef, const ModeSet& ms, const ModeBlock& block);

/// grad^H a grad (that is, -div a grad) on the block, assembled mode by
/// mode: entry ((z, r), (w, c)) is sum_{j,l} k_j(z) a^(z-w)_{rj,cl} k_l(w).
CMatrix divergence_form_matrix(const CoefficientField& coef, const ModeSet& ms, const Theta& theta,
                               const ModeBlock& block);

/// Connected components of the mode graph linking z and z + w for every
/// w in the union of the coefficient supports. Every operator in this
/// library preserves these blocks.
std::vector<ModeBlock> coupled_mode_blocks(const ModeSet& ms, std::span<const CoefficientField* const> coefs);

}  // namespace fibrehom::fourier
