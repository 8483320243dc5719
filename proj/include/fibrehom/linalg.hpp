#pragma once

#include "fibrehom/types.hpp"

namespace fibrehom {

/// Singular values in decreasing order.
RVector singular_values(const CMatrix& x);

/// Largest singular value. Zero for empty matrices.
double op_norm(const CMatrix& x);

/// Smallest singular value. Zero for empty matrices.
double min_singular_value(const CMatrix& x);

CMatrix hermitian_part(const CMatrix& x);

/// Smallest eigenvalue of (x + x^H)/2.
double min_real_part(const CMatrix& x);

/// Orthonormal basis of the orthogonal complement of range(basis), which
/// must have orthonormal columns.
CMatrix orthonormal_complement(const CMatrix& basis);

/// LU reciprocal condition estimate, capped by the pivot ratio.
double reciprocal_condition(const Eigen::PartialPivLU<CMatrix>& lu);

/// Dense inverse via partial-pivot LU. Throws HypothesisError carrying the
/// reciprocal condition estimate when the factorisation is numerically
/// singular.
CMatrix checked_inverse(const CMatrix& x, const std::string& what,
                        double* cond_estimate = nullptr);

double max_abs(const CMatrix& x);

/// ||x - y||_F / max(||y||_F, tiny).
double relative_gap(const CMatrix& x, const CMatrix& y);

}  // namespace fibrehom
