#include "fibrehom/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "fibrehom/linalg.hpp"
#include "fibrehom/random.hpp"

namespace fibrehom::elliptic {

namespace {

std::vector<ModeBlock> blocks_for(const CoefficientField& a, const CoefficientField& s, const ModeSet& ms) {
  const CoefficientField* coefs[] = {&a, &s};
  return fourier::coupled_mode_blocks(ms, coefs);
}

void require_pair(const CoefficientField& a, const CoefficientField& s, const ModeSet& ms) {
  if (a.d != ms.dim() || s.d != ms.dim()) throw InputError("coefficient and mode set dimensions differ");
  if (a.rows != ms.components() * ms.dim()) throw InputError("a must act on n x d tensors");
  if (s.rows != ms.components()) throw InputError("s must act on n-vectors");
  if (ms.n_trunc() < std::max(a.bandwidth(), s.bandwidth())) {
    throw InputError("truncation order below the coefficient bandwidth");
  }
}

cell::AhomProvider provider_or_direct(const SweepOptions& opt, const CoefficientField& a, const ModeSet& ms) {
  if (opt.provider_for) return opt.provider_for(ms);
  return cell::direct_provider(a, ms);
}

std::string cell_label(const Theta& theta, double eps) {
  std::string s = "theta = (";
  for (int j = 0; j < theta.dim(); ++j) {
    if (j) s += ", ";
    s += std::to_string(theta[j]);
  }
  return s + "), eps = " + std::to_string(eps);
}

// Budget constants of the exact and homogenised block systems at one theta.
struct ThetaBudget {
  double c_exact = std::numeric_limits<double>::infinity();
  double m_exact = 0.0;
  double c_hom = std::numeric_limits<double>::infinity();
  double m_hom = 0.0;
  double c_r = 0.0;
  bool hypothesis_ok = true;
  CMatrix hom_m_nn, hom_a_nn, hom_iota_n;  // N-compression of the hom system, zero block
  Index scalar_dim0 = 0;
};

ThetaBudget measure_budget(const CoefficientField& a, const CoefficientField& s, const CoefficientField& ahom,
                           const CoefficientField& mean, const ModeSet& ms, const Theta& theta,
                           const std::vector<ModeBlock>& blocks, const Tolerances& tols) {
  ThetaBudget b;
  for (const auto& block : blocks) {
    const BlockSystemFibre exact = build_block_fibre(a, s, ms, theta, block);
    const BlockSystemFibre hom = build_block_fibre(ahom, mean, ms, theta, block);
    const auto r1 = abstract::validate_hypothesis(exact.fibre, tols);
    const auto r2 = abstract::validate_hypothesis(hom.fibre, tols);
    b.hypothesis_ok = b.hypothesis_ok && r1.pass() && r2.pass();
    b.c_exact = std::min(b.c_exact, r1.c_lower);
    b.m_exact = std::max(b.m_exact, r1.m_norm);
    b.c_hom = std::min(b.c_hom, r2.c_lower);
    b.m_hom = std::max(b.m_hom, r2.m_norm);
    b.c_r = std::max({b.c_r, r1.c_r, r2.c_r});
    if (block.front() == 0) {
      b.hom_iota_n = hom.fibre.n_basis;
      b.hom_m_nn = hom.fibre.n_basis.adjoint() * hom.fibre.m * hom.fibre.n_basis;
      b.hom_a_nn = hom.fibre.n_basis.adjoint() * hom.fibre.a * hom.fibre.n_basis;
      b.scalar_dim0 = hom.scalar_dim;
    }
  }
  return b;
}

struct GridBudget {
  abstract::ErrorBudget exact, hom;
  double kappa = 0.0;
  double threshold = 0.0;
  double c_r_max = 0.0;
  bool hypothesis_ok = true;
};

GridBudget combine(const std::vector<ThetaBudget>& per_theta) {
  double c1 = std::numeric_limits<double>::infinity(), m1 = 0, c2 = c1, m2 = 0, cr = 0;
  bool ok = true;
  for (const auto& b : per_theta) {
    c1 = std::min(c1, b.c_exact);
    m1 = std::max(m1, b.m_exact);
    c2 = std::min(c2, b.c_hom);
    m2 = std::max(m2, b.m_hom);
    cr = std::max(cr, b.c_r);
    ok = ok && b.hypothesis_ok;
  }
  GridBudget g;
  g.exact = abstract::kappa_constant(c1, m1, cr);
  g.hom = abstract::kappa_constant(c2, m2, cr);
  g.kappa = g.exact.kappa + g.hom.kappa;
  g.threshold = std::min(g.exact.eps_threshold, g.hom.eps_threshold);
  g.c_r_max = cr;
  g.hypothesis_ok = ok;
  return g;
}

void add_rate_checks(SweepResult& out, const SweepOptions& opt, const GridBudget& g) {
  fit_sweep_slope(out);
  out.checks.push_back({"slope_window", out.slope, out.slope >= opt.slope_lo && out.slope <= opt.slope_hi});
  const auto per_eps = out.max_err_by_eps();
  bool monotone = true;
  for (std::size_t i = 1; i < per_eps.size(); ++i) monotone = monotone && per_eps[i].second < per_eps[i - 1].second;
  out.checks.push_back({"monotone", monotone ? 1.0 : 0.0, monotone});
  out.checks.push_back({"C_R_bound", g.c_r_max, g.c_r_max <= 1.0 / std::numbers::pi + opt.tol_trunc});
  out.checks.push_back({"hypothesis", g.hypothesis_ok ? 1.0 : 0.0, g.hypothesis_ok});
}

void add_doubling_check(SweepResult& out, const SweepOptions& opt) {
  // compares the grid maxima e(eps) at both truncations
  std::vector<std::pair<double, double>> doubled;
  for (const auto& r : out.rows) {
    const double v = r.aux_value("err_doubled");
    auto it = std::find_if(doubled.begin(), doubled.end(), [&](const auto& p) { return p.first == r.eps; });
    if (it == doubled.end()) {
      doubled.push_back({r.eps, v});
    } else {
      it->second = std::max(it->second, v);
    }
  }
  double worst = 0.0;
  for (const auto& [e, base] : out.max_err_by_eps()) {
    const auto it = std::find_if(doubled.begin(), doubled.end(), [&](const auto& p) { return p.first == e; });
    const double denom = std::max(base, std::numeric_limits<double>::min());
    worst = std::max(worst, std::abs(it->second - base) / denom);
  }
  out.checks.push_back({"truncation_doubling", worst, worst < opt.doubling_tol});
}

void fill_row(SweepRow& row, const GridBudget& g, int n_trunc) {
  row.c = std::min(g.exact.c, g.hom.c);
  row.m_norm = std::max(g.exact.m_norm, g.hom.m_norm);
  row.c_r = g.c_r_max;
  row.kappa = g.kappa;
  row.n_trunc = n_trunc;
}

}  // namespace

CoefficientField constant_field(int d, const CMatrix& value) {
  return fourier::constant_coefficient(d, value, std::max(min_real_part(value), 1e-300));
}

BlockSystemFibre build_block_fibre(const CoefficientField& a, const CoefficientField& s, const ModeSet& ms,
                                   const Theta& theta) {
  return build_block_fibre(a, s, ms, theta, fourier::all_modes(ms));
}

BlockSystemFibre build_block_fibre(const CoefficientField& a, const CoefficientField& s, const ModeSet& ms,
                                   const Theta& theta, const ModeBlock& block) {
  require_pair(a, s, ms);
  const Index n = ms.components();
  const Index width = n * ms.dim();
  BlockSystemFibre out{theta, ms, block, {}, fourier::p_theta_basis(ms, theta, block), 0};
  out.scalar_dim = static_cast<Index>(block.size()) * n;
  const Index p_dim = out.iota_p.cols();
  const Index dim = out.scalar_dim + p_dim;

  const CMatrix a_p = out.iota_p.adjoint() * fourier::multiplication_matrix(a, ms, block) * out.iota_p;
  auto& f = out.fibre;
  f.m = CMatrix::Zero(dim, dim);
  f.m.topLeftCorner(out.scalar_dim, out.scalar_dim) = fourier::multiplication_matrix(s, ms, block);
  f.m.bottomRightCorner(p_dim, p_dim) = checked_inverse(a_p, "a compressed to P(theta)");

  f.a = CMatrix::Zero(dim, dim);
  f.a.topRightCorner(out.scalar_dim, p_dim) = -fourier::div_theta_matrix(ms, theta, block) * out.iota_p;
  f.a.bottomLeftCorner(p_dim, out.scalar_dim) = -out.iota_p.adjoint() * fourier::grad_theta_matrix(ms, theta, block);

  const bool has_zero = !block.empty() && block.front() == 0;
  const Index k = has_zero ? n + width : 0;
  f.n_basis = CMatrix::Zero(dim, k);
  if (has_zero) {
    for (Index r = 0; r < n; ++r) f.n_basis(r, r) = 1.0;
    for (Index q = 0; q < width; ++q) f.n_basis(out.scalar_dim + q, n + q) = 1.0;
  }
  return out;
}

SecondOrder second_order_operator(const CoefficientField& a, const CoefficientField& s, const ModeSet& ms,
                                  const Theta& theta, const ModeBlock& block) {
  require_pair(a, s, ms);
  return {fourier::divergence_form_matrix(a, ms, theta, block), fourier::multiplication_matrix(s, ms, block)};
}

SecondOrder homogenised_operator(const CMatrix& ahom, const CMatrix& mean_s, const ModeSet& ms, const Theta& theta,
                                 const ModeBlock& block) {
  return second_order_operator(constant_field(ms.dim(), ahom), constant_field(ms.dim(), mean_s), ms, theta, block);
}

CMatrix fibre_resolvent(const CoefficientField& a, const CoefficientField& s, const ModeSet& ms, const Theta& theta,
                        double eps) {
  if (!(eps > 0.0)) throw InputError("eps must be positive");
  return checked_inverse(second_order_operator(a, s, ms, theta, fourier::all_modes(ms)).at(eps),
                         "second-order fibre operator");
}

CMatrix fibre_hom_resolvent(const CoefficientField& a, const CoefficientField& s, const ModeSet& ms,
                            const Theta& theta, double eps) {
  if (!(eps > 0.0)) throw InputError("eps must be positive");
  const CMatrix ahom = cell::assemble_ahom(a, ms, theta).entries;
  return checked_inverse(
      homogenised_operator(ahom, cell::mean_matrix(s), ms, theta, fourier::all_modes(ms)).at(eps),
      "homogenised fibre operator");
}

CVector mode_zero_source(const ModeSet& ms, int component) {
  if (component < 0 || component >= ms.components()) throw InputError("source component out of range");
  CVector f = CVector::Zero(ms.scalar_size());
  f(component) = 1.0;
  return f;
}

CVector seeded_source(const ModeSet& ms, std::uint64_t seed) {
  Rng rng(seed);
  const CVector f = rng.gaussian(ms.scalar_size());
  return f / f.norm();
}

namespace {

// Grid maxima of |L^{-1} - L_hom^{-1}| at one theta for each eps.
std::vector<double> resolvent_gaps(const CoefficientField& a, const CoefficientField& s, const CMatrix& ahom,
                                   const CMatrix& mean, const ModeSet& ms, const Theta& theta,
                                   const std::vector<ModeBlock>& blocks, std::span<const double> eps_list,
                                   std::vector<double>* cond, std::vector<CMatrix>* zero_block_inverse) {
  std::vector<double> err(eps_list.size(), 0.0);
  if (cond) cond->assign(eps_list.size(), 0.0);
  if (zero_block_inverse) zero_block_inverse->assign(eps_list.size(), CMatrix());
  for (const auto& block : blocks) {
    const SecondOrder exact = second_order_operator(a, s, ms, theta, block);
    const SecondOrder hom = homogenised_operator(ahom, mean, ms, theta, block);
    for (std::size_t e = 0; e < eps_list.size(); ++e) {
      double c = 0.0;
      const CMatrix inv = checked_inverse(exact.at(eps_list[e]), "second-order fibre operator", &c);
      const CMatrix inv_hom = checked_inverse(hom.at(eps_list[e]), "homogenised fibre operator");
      err[e] = std::max(err[e], op_norm(inv - inv_hom));
      if (cond) (*cond)[e] = std::max((*cond)[e], c);
      if (zero_block_inverse && block.front() == 0) (*zero_block_inverse)[e] = inv;
    }
  }
  return err;
}

}  // namespace

std::vector<SweepCell> sweep_cells(std::span<const Theta> grid, std::span<const double> eps_list, bool scaled_probes) {
  std::vector<SweepCell> cells;
  std::vector<std::size_t> all(eps_list.size());
  for (std::size_t e = 0; e < all.size(); ++e) all[e] = e;
  for (const auto& theta : grid) cells.push_back({theta, all});
  if (!scaled_probes) return cells;
  const double pi = std::numbers::pi;
  for (std::size_t e = 0; e < eps_list.size(); ++e) {
    for (const auto& xi : grid) {
      if (xi.norm() == 0.0) continue;
      std::vector<double> v = xi.values();
      bool inside = true;
      for (double& t : v) {
        t *= eps_list[e];
        inside = inside && t >= -pi && t < pi;
      }
      if (!inside) continue;
      const bool on_grid = std::any_of(grid.begin(), grid.end(), [&](const Theta& g) { return g.values() == v; });
      if (!on_grid) cells.push_back({Theta(v), {e}});
    }
  }
  return cells;
}

namespace {

std::vector<double> pick(std::span<const double> eps_list, const std::vector<std::size_t>& idx) {
  std::vector<double> out;
  for (std::size_t e : idx) out.push_back(eps_list[e]);
  return out;
}

void set_verdict(SweepRow& row, double threshold, double num_tol) {
  if (row.eps >= threshold) {
    row.verdict = Verdict::flagged;
  } else {
    row.verdict = row.err <= row.bound + num_tol ? Verdict::pass : Verdict::fail;
  }
}

}  // namespace

SweepResult certify_quanthom(const CoefficientField& a, const CoefficientField& s, const ModeSet& ms,
                             std::span<const Theta> grid, std::span<const double> eps_list,
                             const SweepOptions& opt) {
  require_pair(a, s, ms);
  const cell::AhomProvider get = provider_or_direct(opt, a, ms);
  const CMatrix mean = cell::mean_matrix(s);
  const CoefficientField mean_field = constant_field(ms.dim(), mean);
  const std::vector<ModeBlock> blocks = blocks_for(a, s, ms);

  std::optional<ModeSet> doubled;
  std::vector<ModeBlock> blocks2;
  cell::AhomProvider get2;
  if (opt.doubling_check) {
    doubled.emplace(ms.dim(), ms.components(), 2 * ms.n_trunc());
    blocks2 = blocks_for(a, s, *doubled);
    get2 = provider_or_direct(opt, a, *doubled);
  }

  const std::vector<SweepCell> cells = sweep_cells(grid, eps_list, opt.scaled_probes);
  struct CellResult {
    ThetaBudget budget;
    std::vector<double> err, err_compressed, err_doubled, cond;
  };
  std::vector<CellResult> results(cells.size());
  parallel_for(cells.size(), [&](std::size_t i) {
    const Theta& theta = cells[i].theta;
    const std::vector<double> eps = pick(eps_list, cells[i].eps);
    try {
      CellResult& res = results[i];
      const CMatrix ahom = get(theta);
      res.budget = measure_budget(a, s, constant_field(ms.dim(), ahom), mean_field, ms, theta, blocks, opt.tols);
      std::vector<CMatrix> zero_inv;
      res.err = resolvent_gaps(a, s, ahom, mean, ms, theta, blocks, eps, &res.cond, &zero_inv);
      const ThetaBudget& b = res.budget;
      for (std::size_t e = 0; e < eps.size(); ++e) {
        // N-compressed homogenised system, read off on the u coordinates
        const CMatrix bn = b.hom_m_nn + b.hom_a_nn / eps[e];
        const CMatrix x = b.hom_iota_n * checked_inverse(bn, "compressed homogenised system") * b.hom_iota_n.adjoint();
        CMatrix gap = zero_inv[e];
        gap -= x.topLeftCorner(b.scalar_dim0, b.scalar_dim0);
        res.err_compressed.push_back(op_norm(gap));
      }
      if (doubled) {
        res.err_doubled = resolvent_gaps(a, s, get2(theta), mean, *doubled, theta, blocks2, eps, nullptr, nullptr);
      }
    } catch (const std::exception& ex) {
      throw std::runtime_error(std::string(ex.what()) + " at " + cell_label(theta, eps.front()));
    }
  });

  std::vector<ThetaBudget> budgets;
  for (const auto& r : results) budgets.push_back(r.budget);
  const GridBudget g = combine(budgets);

  SweepResult out;
  out.name = "quanthom";
  std::vector<double> worst_compressed(eps_list.size(), 0.0);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t k = 0; k < cells[i].eps.size(); ++k) {
      const std::size_t e = cells[i].eps[k];
      SweepRow row;
      row.theta = cells[i].theta.values();
      row.eps = eps_list[e];
      row.err = results[i].err[k];
      row.bound = g.kappa * row.eps;
      fill_row(row, g, ms.n_trunc());
      row.cond_max = results[i].cond[k];
      row.aux.push_back({"C_R_fibre", results[i].budget.c_r});
      row.aux.push_back({"err_compressed", results[i].err_compressed[k]});
      if (doubled) row.aux.push_back({"err_doubled", results[i].err_doubled[k]});
      set_verdict(row, g.threshold, opt.tols.num);
      worst_compressed[e] = std::max(worst_compressed[e], results[i].err_compressed[k]);
      out.rows.push_back(std::move(row));
    }
  }
  out.sort_rows();
  add_rate_checks(out, opt, g);
  if (doubled) add_doubling_check(out, opt);
  // the compressed variant is asserted at the same rate
  const SlopeFit fit = fit_loglog(std::vector<double>(eps_list.begin(), eps_list.end()), worst_compressed);
  out.checks.push_back({"compressed_slope", fit.slope, fit.slope >= opt.slope_lo && fit.slope <= opt.slope_hi});
  return out;
}

SweepResult certify_flux(const CoefficientField& a, const CoefficientField& s, const ModeSet& ms,
                         std::span<const Theta> grid, std::span<const double> eps_list, const CVector& f,
                         const SweepOptions& opt) {
  require_pair(a, s, ms);
  if (f.size() != ms.scalar_size()) throw InputError("flux source has the wrong size");
  const cell::AhomProvider get = provider_or_direct(opt, a, ms);
  const CMatrix mean = cell::mean_matrix(s);
  const CoefficientField mean_field = constant_field(ms.dim(), mean);
  const std::vector<ModeBlock> blocks = blocks_for(a, s, ms);
  const Index n = ms.components();
  const double f_norm = f.norm();

  const std::vector<SweepCell> cells = sweep_cells(grid, eps_list, opt.scaled_probes);
  struct CellResult {
    ThetaBudget budget;
    std::vector<double> gap, cond;
  };
  std::vector<CellResult> results(cells.size());
  parallel_for(cells.size(), [&](std::size_t i) {
    const Theta& theta = cells[i].theta;
    const std::vector<double> eps = pick(eps_list, cells[i].eps);
    try {
      CellResult& res = results[i];
      const CMatrix ahom = get(theta);
      const CoefficientField ahom_field = constant_field(ms.dim(), ahom);
      res.budget = measure_budget(a, s, ahom_field, mean_field, ms, theta, blocks, opt.tols);
      res.gap.assign(eps.size(), 0.0);
      res.cond.assign(eps.size(), 0.0);
      for (const auto& block : blocks) {
        CVector fb(static_cast<Index>(block.size()) * n);
        for (std::size_t b = 0; b < block.size(); ++b) {
          fb.segment(static_cast<Index>(b) * n, n) = f.segment(static_cast<Index>(block[b]) * n, n);
        }
        if (fb.norm() == 0.0) continue;
        const CMatrix grad = fourier::grad_theta_matrix(ms, theta, block);
        const CMatrix proj = fourier::projection_P_theta(ms, theta, block);
        const CMatrix flux_exact = proj * fourier::multiplication_matrix(a, ms, block) * grad;
        const CMatrix flux_hom = proj * fourier::multiplication_matrix(ahom_field, ms, block) * grad;
        const SecondOrder exact = second_order_operator(a, s, ms, theta, block);
        const SecondOrder hom = homogenised_operator(ahom, mean, ms, theta, block);
        for (std::size_t e = 0; e < eps.size(); ++e) {
          Eigen::PartialPivLU<CMatrix> lu(exact.at(eps[e]));
          const CVector u = lu.solve(fb);
          const CVector v = hom.at(eps[e]).partialPivLu().solve(fb);
          const double gap = ((flux_exact * u - flux_hom * v) / eps[e]).norm();
          res.gap[e] = std::hypot(res.gap[e], gap);
          res.cond[e] = std::max(res.cond[e], 1.0 / reciprocal_condition(lu));
        }
      }
    } catch (const std::exception& ex) {
      throw std::runtime_error(std::string(ex.what()) + " at " + cell_label(theta, eps.front()));
    }
  });

  std::vector<ThetaBudget> budgets;
  for (const auto& r : results) budgets.push_back(r.budget);
  const GridBudget g = combine(budgets);

  SweepResult out;
  out.name = "flux";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t k = 0; k < cells[i].eps.size(); ++k) {
      SweepRow row;
      row.theta = cells[i].theta.values();
      row.eps = eps_list[cells[i].eps[k]];
      row.err = results[i].gap[k];
      row.bound = g.kappa * row.eps * f_norm;
      fill_row(row, g, ms.n_trunc());
      row.cond_max = results[i].cond[k];
      set_verdict(row, g.threshold, opt.tols.num);
      out.rows.push_back(std::move(row));
    }
  }
  out.sort_rows();
  add_rate_checks(out, opt, g);
  return out;
}

}  // namespace fibrehom::elliptic
