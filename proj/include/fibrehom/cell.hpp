#pragma once

#include <functional>
#include <span>

#include "fibrehom/coefficient.hpp"
#include "fibrehom/fourier.hpp"
#include "fibrehom/sweep.hpp"
#include "fibrehom/types.hpp"

namespace fibrehom::cell {

using fourier::CoefficientField;
using fourier::ModeSet;
using fourier::Theta;

/// Cell average s^(0); s must be square.
CMatrix mean_matrix(const CoefficientField& s);

struct CorrectorSolution {
  Theta theta;
  int r = 0;  // component, 0-based
  int s = 0;  // direction, 0-based
  fourier::QuasiPeriodicField coeffs;  // n components; mode 0 stays zero
  double residual_norm = 0.0;          // relative Galerkin residual
  double condition = 0.0;
  bool ill_conditioned = false;        // condition above 1e12
};

/// Corrector for the unit tensor E_rs: modes z != 0 with
/// <a (grad N + e^{i theta y} E_rs), grad phi> = 0 for all such phi.
CorrectorSolution solve_cell(const CoefficientField& a, const ModeSet& ms, const Theta& theta, int r, int s);

struct HomogenisedTensor {
  Theta theta;
  CMatrix entries;             // (n d) x (n d), row-major flattening of C^{n x d}
  double nu_measured = 0.0;    // min eigenvalue of the real part
  double sesquilinear_gap = 0.0;  // relative gap to <a W X, W Z> assembly
  double cond_max = 0.0;
  bool ill_conditioned = false;
};

/// Column q of a^hom(theta) is the mode-0 block of a (grad N^(q) + E_q).
HomogenisedTensor assemble_ahom(const CoefficientField& a, const ModeSet& ms, const Theta& theta);

/// Mode-0 block of (iota_P^H a iota_P)^{-1}; equals a^hom(theta)^{-1}
/// without going through correctors.
CMatrix ahom_inverse_via_projection(const CoefficientField& a, const ModeSet& ms, const Theta& theta);

struct TensorBounds {
  double nu = 0.0;          // declared coercivity of a
  double re_a_norm = 0.0;   // |Re a| (Galerkin)
  double a_norm = 0.0;      // |a| (Galerkin)
  double min_re_eig = 0.0;  // of a^hom
  double re_norm = 0.0;     // |Re a^hom|
  double norm = 0.0;        // |a^hom|
  bool coercive = false;
  bool re_bounded = false;
  bool norm_bounded = false;
  bool pass() const { return coercive && re_bounded && norm_bounded; }
};

TensorBounds check_tensor_bounds(const HomogenisedTensor& t, const CoefficientField& a, const ModeSet& ms,
                                 double tol = 1e-10);

/// Supplies a^hom(theta); lets callers put a cache in front of assemble_ahom.
using AhomProvider = std::function<CMatrix(const Theta&)>;
AhomProvider direct_provider(const CoefficientField& a, const ModeSet& ms);

/// Per theta: |a^hom(theta) - a^hom(0)| (err) and its ratio to |theta| (aux).
SweepResult lipschitz_sweep(const CoefficientField& a, const ModeSet& ms, std::span<const Theta> grid,
                            const AhomProvider& provider = {});

/// Solves eps^-2 a^hom(theta)(b (x) theta) theta + m(s) b = f against the
/// same system with a^hom(0); err is the operator norm of the difference
/// of the two solution maps. The bound is C eps with C frozen from the
/// grid's largest Lipschitz ratio L and the coercivity nu of the tensors:
/// C = L * 3 sqrt(3) / (16 nu^2).
SweepResult classical_limit_check(const CoefficientField& a, const CoefficientField& s, const ModeSet& ms,
                                  std::span<const Theta> grid, std::span<const double> eps_list,
                                  const AhomProvider& provider = {});

/// n x n matrix of b -> A(b (x) theta) theta for a (n d) x (n d) tensor A.
CMatrix contract_with_direction(const CMatrix& tensor, std::span<const double> direction, int n);

}  // namespace fibrehom::cell
