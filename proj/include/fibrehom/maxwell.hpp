#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fibrehom/abstract.hpp"
#include "fibrehom/coefficient.hpp"
#include "fibrehom/fourier.hpp"
#include "fibrehom/sweep.hpp"

namespace fibrehom::maxwell {

using fourier::CoefficientField;
using fourier::ModeBlock;
using fourier::ModeSet;
using fourier::Theta;

/// Maxwell fibre on a mode block, small parameter eta:
/// M = diag(eps, mu), A = [[0, -curl], [curl, 0]], N = n(theta) x n(theta).
/// Coordinates: E then H, three components per mode each.
struct MaxwellFibre {
  Theta theta = Theta::zero(3);
  ModeSet ms;
  ModeBlock block;
  CMatrix perm_eps, perm_mu, curl, n_proj;
  abstract::OperatorFamilyFibre fibre;
};

MaxwellFibre build_maxwell_fibre(const CoefficientField& perm_eps, const CoefficientField& perm_mu,
                                 const ModeSet& ms, const Theta& theta);
MaxwellFibre build_maxwell_fibre(const CoefficientField& perm_eps, const CoefficientField& perm_mu,
                                 const ModeSet& ms, const Theta& theta, const ModeBlock& block);

struct MaxwellOptions {
  double tol_trunc = 1e-9;
  double slope_lo = 0.85;
  double slope_hi = 1.3;
  int refine_to = 0;  // >0: rerun at this truncation and compare grid maxima
  double refine_tol = 0.05;
  Tolerances tols;
};

/// Per (theta, eta): |(M + A/eta)^{-1} - (pi_N M pi_N + A/eta)^{-1}| against
/// kappa * eta, with the budget measured over the grid.
SweepResult certify_maxhom(const CoefficientField& perm_eps, const CoefficientField& perm_mu, const ModeSet& ms,
                           std::span<const Theta> grid, std::span<const double> eta_list,
                           const MaxwellOptions& options = {});

/// Homogenised 3x3 tensor for a permittivity-type coefficient: the inverse
/// of the mode-0 block of (iota_n^H perm iota_n)^{-1}.
CMatrix homogenised_perm(const CoefficientField& perm, const ModeSet& ms, const Theta& theta);

/// |pi_{n2} f|, the part of f along gradients at modes z != 0.
double gradient_component(const ModeSet& ms, const Theta& theta, const CVector& f);

/// Source with its gradient part removed.
CVector admissible_part(const ModeSet& ms, const Theta& theta, const CVector& f);

struct EquivalenceReport {
  Theta theta = Theta::zero(3);
  int sources = 0;
  double max_gap = 0.0;  // relative, over all sources
  double max_gradient_component = 0.0;
  CMatrix eps_hom, mu_hom;
  bool pass = false;
};

/// Solves the compressed limit system (pi_n eps pi_n, pi_n mu pi_n) with
/// right-hand side (f, 0) and the system with eps^hom, mu^hom acting on the
/// mode-0 constants (gradient parts rebuilt from the compressed tensor),
/// and compares the fields. Throws HypothesisError carrying the measured
/// gradient component for an inadmissible source.
EquivalenceReport ehom_equivalence(const CoefficientField& perm_eps, const CoefficientField& perm_mu,
                                   const ModeSet& ms, const Theta& theta, double eta,
                                   const std::vector<CVector>& sources, double tol = 1e-10);

/// Same with `count` random admissible sources.
EquivalenceReport ehom_equivalence(const CoefficientField& perm_eps, const CoefficientField& perm_mu,
                                   const ModeSet& ms, const Theta& theta, double eta, std::uint64_t seed,
                                   int count = 20, double tol = 1e-10);

struct CurlIdentityReport {
  double hermitian = 0.0;        // |curl - curl^H|
  double compressed = 0.0;       // |curl pi_n - (i theta x) pi_{n1}|
  double commutator = 0.0;       // |pi_n curl - curl pi_n|
  double gradient_kernel = 0.0;  // |curl pi_{n2}|
  bool pass(double tol) const {
    return hermitian <= tol && compressed <= tol && commutator <= tol && gradient_kernel <= tol;
  }
};

/// Entrywise maxima of the residuals.
CurlIdentityReport curl_identities(const ModeSet& ms, const Theta& theta);

struct PoincareReport {
  std::vector<double> min_singular;  // per theta, curl restricted to r(theta)
  double overall_min = 0.0;
  bool pass = false;
};

PoincareReport curl_poincare_check(const ModeSet& ms, std::span<const Theta> grid, double tol = 1e-12);

}  // namespace fibrehom::maxwell
