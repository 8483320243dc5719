#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fibrehom/sweep.hpp"
#include "fibrehom/types.hpp"

namespace fibrehom::abstract {

/// One fibre B_eps = M + A/eps together with an orthonormal basis of the
/// distinguished subspace N. R is the orthogonal complement of N.
struct OperatorFamilyFibre {
  CMatrix m;
  CMatrix a;        // skew-Hermitian
  CMatrix n_basis;  // dim x k, orthonormal columns

  Index dim() const { return m.rows(); }
};

struct ConditionCheck {
  std::string name;
  double residual = 0.0;
  bool pass = true;
};

struct HypothesisReport {
  std::vector<ConditionCheck> checks;
  double c_lower = 0.0;  // smallest eigenvalue of Re M
  double c_r = 0.0;      // norm of (iota_R^H A iota_R)^{-1}; 0 when R is trivial
  double m_norm = 0.0;

  bool pass() const;
  const ConditionCheck& check(const std::string& name) const;
};

/// Checks skew-symmetry, accretivity, orthonormality, the N/R commutation
/// and restricted invertibility. Only shape problems throw.
HypothesisReport validate_hypothesis(const OperatorFamilyFibre& fibre, const Tolerances& tols = {});

/// Pieces of the N/R block decomposition that do not depend on eps.
struct FibreSplit {
  CMatrix iota_n;
  CMatrix iota_r;
  CMatrix m_nn;     // iota_N^H M iota_N
  CMatrix a_nn;     // iota_N^H A iota_N
  CMatrix a_r_inv;  // (iota_R^H A iota_R)^{-1}
};

/// Throws HypothesisError when A restricted to R is singular.
FibreSplit split_fibre(const OperatorFamilyFibre& fibre);

/// (M + A/eps)^{-1}.
CMatrix resolvent(const OperatorFamilyFibre& fibre, double eps, double* cond_estimate = nullptr);

/// (pi_N M pi_N + A/eps)^{-1}, assembled blockwise as
/// iota_N B_N^{-1} iota_N^H + eps iota_R A_R^{-1} iota_R^H.
CMatrix limit_resolvent(const OperatorFamilyFibre& fibre, double eps);
CMatrix limit_resolvent(const FibreSplit& split, double eps);

/// iota_N B_N^{-1} iota_N^H with B_N = iota_N^H (M + A/eps) iota_N.
CMatrix compressed_resolvent(const FibreSplit& split, double eps);

/// The limit resolvent with A_R^{-1} replaced by the R-compression of t.
CMatrix surrogate_resolvent(const OperatorFamilyFibre& fibre, double eps, const CMatrix& t);

struct ErrorBudget {
  double c = 0.0;
  double m_norm = 0.0;
  double c_r = 0.0;
  double kappa = 0.0;
  double eps_threshold = 0.0;

  /// 2 C_R (1 + |M|/c)^2, the constant of the N-compressed comparison.
  double kappa_compressed() const;
};

ErrorBudget kappa_constant(double c, double m_norm, double c_r);

/// Budget from the worst constants over a set of validated fibres.
ErrorBudget family_budget(std::span<const HypothesisReport> reports);

/// Per (fibre, eps): operator-norm gap between resolvent and limit resolvent
/// against kappa*eps, and the N-compressed gap against kappa_compressed*eps.
/// Fibre k is reported with theta = {k}.
SweepResult certify_mtgr(std::span<const OperatorFamilyFibre> family, std::span<const double> eps_list,
                         const Tolerances& tols = {});

/// Two families sharing pi_N M pi_N: ||B^{-1} - B~^{-1}|| against the sum of
/// both budgets times eps.
SweepResult certify_hom2(std::span<const OperatorFamilyFibre> family,
                         std::span<const OperatorFamilyFibre> other, std::span<const double> eps_list,
                         const Tolerances& tols = {});

/// Seeded random family of `count` fibres with Re M >= c and every singular
/// value of A on R at least spectral_gap (so C_R <= 1/spectral_gap).
std::vector<OperatorFamilyFibre> make_random_family(std::uint64_t seed, int dim, int k, double c,
                                                    double spectral_gap, int count = 3);

/// Adds an accretive perturbation supported on R x R.
OperatorFamilyFibre perturb_on_complement(const OperatorFamilyFibre& fibre, std::uint64_t seed,
                                          double scale);

}  // namespace fibrehom::abstract
