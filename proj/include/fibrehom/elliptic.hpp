#pragma once

#include <functional>
#include <span>

#include "fibrehom/abstract.hpp"
#include "fibrehom/cell.hpp"
#include "fibrehom/coefficient.hpp"
#include "fibrehom/fourier.hpp"
#include "fibrehom/sweep.hpp"

namespace fibrehom::elliptic {

using fourier::CoefficientField;
using fourier::ModeBlock;
using fourier::ModeSet;
using fourier::Theta;

/// First-order system on [L2]^n (+) P(theta), restricted to a mode block:
/// M = diag(s, (iota_P^H a iota_P)^{-1}), A = [[0, -div iota_P], [-iota_P^H grad, 0]].
/// Coordinates: the u part first (block.size() * n entries), then the
/// P(theta) coordinates in the order of fourier::p_theta_basis.
struct BlockSystemFibre {
  Theta theta;
  ModeSet ms;
  ModeBlock block;
  abstract::OperatorFamilyFibre fibre;
  CMatrix iota_p;
  Index scalar_dim = 0;
};

BlockSystemFibre build_block_fibre(const CoefficientField& a, const CoefficientField& s, const ModeSet& ms,
                                   const Theta& theta);
BlockSystemFibre build_block_fibre(const CoefficientField& a, const CoefficientField& s, const ModeSet& ms,
                                   const Theta& theta, const ModeBlock& block);

/// L(eps) = eps^-2 stiffness + mass, stiffness = -div a grad.
struct SecondOrder {
  CMatrix stiffness;
  CMatrix mass;
  CMatrix at(double eps) const { return stiffness / (eps * eps) + mass; }
};

SecondOrder second_order_operator(const CoefficientField& a, const CoefficientField& s, const ModeSet& ms,
                                  const Theta& theta, const ModeBlock& block);

/// The same operator with a^hom(theta) and m(s) frozen as constants.
SecondOrder homogenised_operator(const CMatrix& ahom, const CMatrix& mean_s, const ModeSet& ms,
                                 const Theta& theta, const ModeBlock& block);

/// (-eps^-2 div a grad + s)^{-1} on the whole mode set.
CMatrix fibre_resolvent(const CoefficientField& a, const CoefficientField& s, const ModeSet& ms,
                        const Theta& theta, double eps);

/// (-eps^-2 div a^hom(theta) grad + m(s))^{-1} on the whole mode set.
CMatrix fibre_hom_resolvent(const CoefficientField& a, const CoefficientField& s, const ModeSet& ms,
                            const Theta& theta, double eps);

/// Wraps a frozen tensor as a constant coefficient field.
CoefficientField constant_field(int d, const CMatrix& value);

struct SweepOptions {
  bool doubling_check = true;
  double tol_trunc = 1e-9;      // slack on C_R <= 1/pi
  double slope_lo = 0.85;
  double slope_hi = 1.3;
  double doubling_tol = 0.05;
  Tolerances tols;
  /// Also sample theta = eps * xi for every nonzero grid point xi (at that
  /// eps only): the worst fibres sit at |theta| ~ eps, which a fixed grid
  /// cannot see.
  bool scaled_probes = true;
  /// Optional a^hom source per mode set (e.g. a cache). Empty: compute.
  std::function<cell::AhomProvider(const ModeSet&)> provider_for;
};

/// One theta with the eps indices evaluated there.
struct SweepCell {
  Theta theta;
  std::vector<std::size_t> eps;
};

/// The base grid at every eps, then the scaled probes eps * xi (skipped
/// when they leave [-pi, pi)^d or coincide with a grid point).
std::vector<SweepCell> sweep_cells(std::span<const Theta> grid, std::span<const double> eps_list, bool scaled_probes);

/// Per (theta, eps): |L^{-1} - L_hom^{-1}|, bounded by (kappa + kappa~) eps
/// where kappa and kappa~ are the budgets of the exact and homogenised
/// first-order systems. Aux carries the N-compressed variant and the
/// doubled-truncation error.
SweepResult certify_quanthom(const CoefficientField& a, const CoefficientField& s, const ModeSet& ms,
                             std::span<const Theta> grid, std::span<const double> eps_list,
                             const SweepOptions& options = {});

/// Source concentrated at mode 0 (the field e^{i theta y} e_component).
CVector mode_zero_source(const ModeSet& ms, int component);

/// Unit-norm Gaussian source over every mode.
CVector seeded_source(const ModeSet& ms, std::uint64_t seed);

/// Per (theta, eps): |eps^-1 pi_P (a grad u - a^hom grad v)| for u, v the
/// exact and homogenised second-order solutions with right-hand side f,
/// against (kappa + kappa~) eps |f|.
SweepResult certify_flux(const CoefficientField& a, const CoefficientField& s, const ModeSet& ms,
                         std::span<const Theta> grid, std::span<const double> eps_list, const CVector& f,
                         const SweepOptions& options = {});

}  // namespace fibrehom::elliptic
