#include "fibrehom/cell.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fibrehom/linalg.hpp"

namespace fibrehom::cell {

namespace {

using fourier::ModeBlock;

void require_compatible(const CoefficientField& a, const ModeSet& ms) {
  if (a.d != ms.dim()) throw InputError("coefficient and mode set dimensions differ");
  if (a.rows != ms.components() * ms.dim()) {
    throw InputError("coefficient must act on n x d tensors of the mode set");
  }
  if (ms.n_trunc() < a.bandwidth()) throw InputError("truncation order below the coefficient bandwidth");
}

ModeBlock zero_block(const CoefficientField& a, const ModeSet& ms) {
  const CoefficientField* coefs[] = {&a};
  return fourier::coupled_mode_blocks(ms, coefs).front();
}

struct CellSystem {
  ModeBlock block;
  CMatrix mult;     // a on the block
  CMatrix grad_r;   // gradient restricted to modes != 0
  CMatrix coeffs;   // corrector coefficients, one column per unit tensor
  CMatrix fields;   // grad N + E (tensor fields), one column per unit tensor
  double residual = 0.0;
  double condition = 1.0;
};

CellSystem solve_system(const CoefficientField& a, const ModeSet& ms, const Theta& theta) {
  require_compatible(a, ms);
  CellSystem sys;
  sys.block = zero_block(a, ms);
  const Index n = ms.components();
  const Index width = n * ms.dim();
  const Index tsize = static_cast<Index>(sys.block.size()) * width;
  sys.mult = fourier::multiplication_matrix(a, ms, sys.block);
  const CMatrix grad = fourier::grad_theta_matrix(ms, theta, sys.block);
  sys.grad_r = grad.rightCols(grad.cols() - n);
  CMatrix e0 = CMatrix::Zero(tsize, width);
  e0.topRows(width).setIdentity();
  if (sys.grad_r.cols() == 0) {
    sys.coeffs = CMatrix::Zero(0, width);
    sys.fields = e0;
    return sys;
  }
  const Index rn = sys.grad_r.cols();
  const CMatrix k = fourier::divergence_form_matrix(a, ms, theta, sys.block).bottomRightCorner(rn, rn);
  const CMatrix rhs = -sys.grad_r.adjoint() * sys.mult.leftCols(width);
  Eigen::PartialPivLU<CMatrix> lu(k);
  const double rcond = reciprocal_condition(lu);
  if (!(rcond > 1e3 * std::numeric_limits<double>::epsilon())) {
    const double lo = min_real_part(k);
    throw CoercivityError("cell problem is singular; smallest real-part eigenvalue " + std::to_string(lo), lo);
  }
  sys.condition = 1.0 / rcond;
  sys.coeffs = lu.solve(rhs);
  sys.residual = (k * sys.coeffs - rhs).norm() / std::max(rhs.norm(), std::numeric_limits<double>::min());
  sys.fields = sys.grad_r * sys.coeffs + e0;
  return sys;
}

}  // namespace

CMatrix mean_matrix(const CoefficientField& s) {
  if (s.rows != s.cols) throw InputError("mean_matrix: coefficient is not square");
  return s.mode({0, 0, 0});
}

CorrectorSolution solve_cell(const CoefficientField& a, const ModeSet& ms, const Theta& theta, int r, int s) {
  if (r < 0 || r >= ms.components() || s < 0 || s >= ms.dim()) throw InputError("solve_cell: index out of range");
  const CellSystem sys = solve_system(a, ms, theta);
  const int n = ms.components();
  CorrectorSolution out{theta, r, s, {ms, n, CVector::Zero(ms.scalar_size())}, sys.residual, sys.condition,
                        sys.condition > 1e12};
  const Index q = r * ms.dim() + s;
  for (std::size_t b = 1; b < sys.block.size(); ++b) {
    for (int c = 0; c < n; ++c) {
      out.coeffs.coeffs(static_cast<Index>(sys.block[b]) * n + c) = sys.coeffs(static_cast<Index>(b - 1) * n + c, q);
    }
  }
  return out;
}

HomogenisedTensor assemble_ahom(const CoefficientField& a, const ModeSet& ms, const Theta& theta) {
  const CellSystem sys = solve_system(a, ms, theta);
  const Index width = ms.components() * ms.dim();
  const CMatrix flux = sys.mult * sys.fields;
  HomogenisedTensor t{theta, flux.topRows(width), 0.0, 0.0, sys.condition, sys.condition > 1e12};
  t.nu_measured = min_real_part(t.entries);
  t.sesquilinear_gap = relative_gap(sys.fields.adjoint() * flux, t.entries);
  return t;
}

CMatrix ahom_inverse_via_projection(const CoefficientField& a, const ModeSet& ms, const Theta& theta) {
  require_compatible(a, ms);
  const ModeBlock block = zero_block(a, ms);
  const CMatrix basis = fourier::p_theta_basis(ms, theta, block);
  const CMatrix compressed = basis.adjoint() * fourier::multiplication_matrix(a, ms, block) * basis;
  CMatrix inv;
  try {
    inv = checked_inverse(compressed, "a compressed to P(theta)");
  } catch (const HypothesisError&) {
    const double lo = min_real_part(compressed);
    throw CoercivityError("a compressed to P(theta) is singular; smallest real-part eigenvalue " +
                              std::to_string(lo),
                          lo);
  }
  const Index width = ms.components() * ms.dim();
  return inv.topLeftCorner(width, width);
}

TensorBounds check_tensor_bounds(const HomogenisedTensor& t, const CoefficientField& a, const ModeSet& ms,
                                 double tol) {
  const CMatrix mult = fourier::multiplication_matrix(a, ms, zero_block(a, ms));
  TensorBounds b;
  b.nu = a.declared_nu;
  b.a_norm = op_norm(mult);
  b.re_a_norm = op_norm(hermitian_part(mult));
  b.min_re_eig = min_real_part(t.entries);
  b.re_norm = op_norm(hermitian_part(t.entries));
  b.norm = op_norm(t.entries);
  b.coercive = b.min_re_eig >= b.nu - tol;
  b.re_bounded = b.re_norm <= b.re_a_norm + tol;
  b.norm_bounded = b.norm <= b.a_norm * b.a_norm / b.nu + tol;
  return b;
}

AhomProvider direct_provider(const CoefficientField& a, const ModeSet& ms) {
  return [a, ms](const Theta& theta) { return assemble_ahom(a, ms, theta).entries; };
}

SweepResult lipschitz_sweep(const CoefficientField& a, const ModeSet& ms, std::span<const Theta> grid,
                            const AhomProvider& provider) {
  const AhomProvider get = provider ? provider : direct_provider(a, ms);
  SweepResult out;
  out.name = "lipschitz";
  const CMatrix at_zero = get(Theta::zero(ms.dim()));
  std::vector<SweepRow> rows(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const CMatrix at = get(grid[i]);
    SweepRow& row = rows[i];
    row.theta = grid[i].values();
    row.eps = 0.0;
    row.err = op_norm(at - at_zero);
    row.n_trunc = ms.n_trunc();
    const double t = grid[i].norm();
    if (t > 0.0) row.aux.push_back({"ratio", row.err / t});
  });
  double max_ratio = 0.0;
  bool finite = true;
  for (auto& r : rows) {
    const double q = r.aux_value("ratio");
    if (!std::isnan(q)) {
      finite = finite && std::isfinite(q);
      max_ratio = std::max(max_ratio, q);
    }
    out.rows.push_back(std::move(r));
  }
  out.checks.push_back({"ratio_bounded", max_ratio, finite});
  out.sort_rows();
  return out;
}

CMatrix contract_with_direction(const CMatrix& tensor, std::span<const double> direction, int n) {
  const int d = static_cast<int>(direction.size());
  if (tensor.rows() != n * d || tensor.cols() != n * d) throw InputError("contract_with_direction: bad shape");
  CMatrix out = CMatrix::Zero(n, n);
  for (int r = 0; r < n; ++r) {
    for (int rr = 0; rr < n; ++rr) {
      Complex acc = 0.0;
      for (int j = 0; j < d; ++j) {
        for (int l = 0; l < d; ++l) {
          acc += tensor(r * d + j, rr * d + l) * direction[static_cast<std::size_t>(j)] *
                 direction[static_cast<std::size_t>(l)];
        }
      }
      out(r, rr) = acc;
    }
  }
  return out;
}

SweepResult classical_limit_check(const CoefficientField& a, const CoefficientField& s, const ModeSet& ms,
                                  std::span<const Theta> grid, std::span<const double> eps_list,
                                  const AhomProvider& provider) {
  const AhomProvider get = provider ? provider : direct_provider(a, ms);
  const int n = ms.components();
  const CMatrix mean = mean_matrix(s);
  if (mean.rows() != n) throw InputError("zero-order coefficient does not act on n components");
  const CMatrix at_zero = get(Theta::zero(ms.dim()));

  std::vector<CMatrix> tensors(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) { tensors[i] = get(grid[i]); });

  double lipschitz = 0.0;
  double nu = std::min(min_real_part(mean), min_real_part(at_zero));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    nu = std::min(nu, min_real_part(tensors[i]));
    const double t = grid[i].norm();
    if (t > 0.0) lipschitz = std::max(lipschitz, op_norm(tensors[i] - at_zero) / t);
  }
  if (!(nu > 0.0)) throw CoercivityError("classical limit check: tensors are not coercive", nu);
  const double frozen = lipschitz * 3.0 * std::sqrt(3.0) / (16.0 * nu * nu);

  SweepResult out;
  out.name = "classical_limit";
  out.checks.push_back({"frozen_constant", frozen, std::isfinite(frozen)});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& dir = grid[i].values();
    const CMatrix t_theta = contract_with_direction(tensors[i], dir, n);
    const CMatrix t_zero = contract_with_direction(at_zero, dir, n);
    for (double eps : eps_list) {
      const double w = 1.0 / (eps * eps);
      const CMatrix sol = checked_inverse(w * t_theta + mean, "classical system");
      const CMatrix sol_zero = checked_inverse(w * t_zero + mean, "classical system at theta = 0");
      SweepRow row;
      row.theta = dir;
      row.eps = eps;
      row.err = op_norm(sol - sol_zero);
      row.bound = frozen * eps;
      row.n_trunc = ms.n_trunc();
      row.verdict = row.err <= row.bound * (1.0 + 1e-9) + 1e-14 ? Verdict::pass : Verdict::fail;
      row.aux.push_back({"nu", nu});
      out.rows.push_back(std::move(row));
    }
  }
  out.sort_rows();
  fit_sweep_slope(out);
  return out;
}

}  // namespace fibrehom::cell
