#include "fibrehom/maxwell.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "fibrehom/cell.hpp"
#include "fibrehom/linalg.hpp"
#include "fibrehom/random.hpp"

namespace fibrehom::maxwell {

namespace {

void require_maxwell(const CoefficientField& perm_eps, const CoefficientField& perm_mu, const ModeSet& ms) {
  if (ms.dim() != 3 || ms.components() != 3) throw InputError("Maxwell fibres need d = 3 and n = 3");
  for (const CoefficientField* p : {&perm_eps, &perm_mu}) {
    if (p->d != 3 || p->rows != 3) throw InputError("permittivity and permeability must be 3x3 fields in d = 3");
  }
  if (ms.n_trunc() < std::max(perm_eps.bandwidth(), perm_mu.bandwidth())) {
    throw InputError("truncation order below the coefficient bandwidth");
  }
}

std::vector<ModeBlock> blocks_for(const CoefficientField& e, const CoefficientField& m, const ModeSet& ms) {
  const CoefficientField* coefs[] = {&e, &m};
  return fourier::coupled_mode_blocks(ms, coefs);
}

CMatrix block_diag(const CMatrix& x, const CMatrix& y) {
  CMatrix out = CMatrix::Zero(x.rows() + y.rows(), x.cols() + y.cols());
  out.topLeftCorner(x.rows(), x.cols()) = x;
  out.bottomRightCorner(y.rows(), y.cols()) = y;
  return out;
}

CMatrix skew_pair(const CMatrix& curl) {
  const Index m = curl.rows();
  CMatrix a = CMatrix::Zero(2 * m, 2 * m);
  a.topRightCorner(m, m) = -curl;
  a.bottomLeftCorner(m, m) = curl;
  return a;
}

// Grid maxima of the resolvent gap at each eta, plus budget data.
struct ThetaResult {
  std::vector<double> err, cond;
  double c = std::numeric_limits<double>::infinity();
  double m_norm = 0.0;
  double c_r = 0.0;
  bool ok = true;
};

ThetaResult measure_theta(const CoefficientField& perm_eps, const CoefficientField& perm_mu, const ModeSet& ms,
                          const Theta& theta, const std::vector<ModeBlock>& blocks, std::span<const double> etas,
                          const Tolerances& tols, bool with_budget) {
  ThetaResult res;
  res.err.assign(etas.size(), 0.0);
  res.cond.assign(etas.size(), 0.0);
  for (const auto& block : blocks) {
    const MaxwellFibre mf = build_maxwell_fibre(perm_eps, perm_mu, ms, theta, block);
    if (with_budget) {
      const auto rep = abstract::validate_hypothesis(mf.fibre, tols);
      res.ok = res.ok && rep.pass();
      res.c = std::min(res.c, rep.c_lower);
      res.m_norm = std::max(res.m_norm, rep.m_norm);
      res.c_r = std::max(res.c_r, rep.c_r);
    }
    const abstract::FibreSplit split = abstract::split_fibre(mf.fibre);
    const CMatrix r_term = split.iota_r * split.a_r_inv * split.iota_r.adjoint();
    for (std::size_t e = 0; e < etas.size(); ++e) {
      double cond = 0.0;
      const CMatrix exact = abstract::resolvent(mf.fibre, etas[e], &cond);
      const CMatrix limit = abstract::compressed_resolvent(split, etas[e]) + etas[e] * r_term;
      res.err[e] = std::max(res.err[e], op_norm(exact - limit));
      res.cond[e] = std::max(res.cond[e], cond);
    }
  }
  return res;
}

// Cross-product matrix of i v.
CMatrix i_cross(const std::array<double, 3>& v) {
  Eigen::Vector3cd vv(v[0], v[1], v[2]);
  CMatrix out(3, 3);
  for (int j = 0; j < 3; ++j) {
    Eigen::Vector3cd e = Eigen::Vector3cd::Zero();
    e(j) = 1.0;
    out.col(j) = Complex(0.0, 1.0) * vv.cross(e);
  }
  return out;
}

}  // namespace

MaxwellFibre build_maxwell_fibre(const CoefficientField& perm_eps, const CoefficientField& perm_mu, const ModeSet& ms,
                                 const Theta& theta) {
  return build_maxwell_fibre(perm_eps, perm_mu, ms, theta, fourier::all_modes(ms));
}

MaxwellFibre build_maxwell_fibre(const CoefficientField& perm_eps, const CoefficientField& perm_mu, const ModeSet& ms,
                                 const Theta& theta, const ModeBlock& block) {
  require_maxwell(perm_eps, perm_mu, ms);
  MaxwellFibre mf{theta,
                  ms,
                  block,
                  fourier::multiplication_matrix(perm_eps, ms, block),
                  fourier::multiplication_matrix(perm_mu, ms, block),
                  fourier::curl_theta_matrix(ms, theta, block),
                  fourier::projection_n_theta(ms, theta, block),
                  {}};
  const CMatrix nb = fourier::n_theta_basis(ms, theta, block);
  mf.fibre.m = block_diag(mf.perm_eps, mf.perm_mu);
  mf.fibre.a = skew_pair(mf.curl);
  mf.fibre.n_basis = block_diag(nb, nb);
  return mf;
}

SweepResult certify_maxhom(const CoefficientField& perm_eps, const CoefficientField& perm_mu, const ModeSet& ms,
                           std::span<const Theta> grid, std::span<const double> eta_list,
                           const MaxwellOptions& opt) {
  require_maxwell(perm_eps, perm_mu, ms);
  const auto blocks = blocks_for(perm_eps, perm_mu, ms);
  std::vector<ThetaResult> results(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    results[i] = measure_theta(perm_eps, perm_mu, ms, grid[i], blocks, eta_list, opt.tols, true);
  });

  std::vector<ThetaResult> refined;
  std::optional<ModeSet> fine;
  if (opt.refine_to > 0) {
    fine.emplace(3, 3, opt.refine_to);
    const auto fine_blocks = blocks_for(perm_eps, perm_mu, *fine);
    refined.resize(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
      refined[i] = measure_theta(perm_eps, perm_mu, *fine, grid[i], fine_blocks, eta_list, opt.tols, false);
    });
  }

  double c = std::numeric_limits<double>::infinity(), m = 0.0, cr = 0.0;
  bool ok = true;
  for (const auto& r : results) {
    c = std::min(c, r.c);
    m = std::max(m, r.m_norm);
    cr = std::max(cr, r.c_r);
    ok = ok && r.ok;
  }
  const abstract::ErrorBudget budget = abstract::kappa_constant(c, m, cr);

  SweepResult out;
  out.name = "maxhom";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t e = 0; e < eta_list.size(); ++e) {
      SweepRow row;
      row.theta = grid[i].values();
      row.eps = eta_list[e];
      row.err = results[i].err[e];
      row.bound = budget.kappa * row.eps;
      row.c = budget.c;
      row.m_norm = budget.m_norm;
      row.c_r = budget.c_r;
      row.kappa = budget.kappa;
      row.n_trunc = ms.n_trunc();
      row.cond_max = results[i].cond[e];
      row.aux.push_back({"C_R_fibre", results[i].c_r});
      if (fine) row.aux.push_back({"err_refined", refined[i].err[e]});
      if (row.eps >= budget.eps_threshold) {
        row.verdict = Verdict::flagged;
      } else {
        row.verdict = row.err <= row.bound + opt.tols.num ? Verdict::pass : Verdict::fail;
      }
      out.rows.push_back(std::move(row));
    }
  }
  out.sort_rows();
  fit_sweep_slope(out);
  out.checks.push_back({"slope_window", out.slope, out.slope >= opt.slope_lo && out.slope <= opt.slope_hi});
  out.checks.push_back({"C_R_bound", cr, cr <= 1.0 / std::numbers::pi + opt.tol_trunc});
  out.checks.push_back({"hypothesis", ok ? 1.0 : 0.0, ok});
  if (fine) {
    double worst = 0.0;
    for (std::size_t e = 0; e < eta_list.size(); ++e) {
      double base = 0.0, fine_err = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        base = std::max(base, results[i].err[e]);
        fine_err = std::max(fine_err, refined[i].err[e]);
      }
      worst = std::max(worst, std::abs(fine_err - base) / std::max(base, std::numeric_limits<double>::min()));
    }
    out.checks.push_back({"truncation_refinement", worst, worst < opt.refine_tol});
  }
  return out;
}

CMatrix homogenised_perm(const CoefficientField& perm, const ModeSet& ms, const Theta& theta) {
  const ModeSet scalar = ms.with_components(1);
  return checked_inverse(cell::ahom_inverse_via_projection(perm, scalar, theta), "homogenised permittivity");
}

double gradient_component(const ModeSet& ms, const Theta& theta, const CVector& f) {
  if (f.size() != static_cast<Index>(ms.size()) * 3) throw InputError("source has the wrong size");
  double sq = 0.0;
  for (std::size_t i = 1; i < ms.size(); ++i) {
    const auto k = fourier::wave_vector(theta, ms.mode(i));
    const double kn = std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
    Complex dot = 0.0;
    for (int j = 0; j < 3; ++j) dot += k[static_cast<std::size_t>(j)] / kn * f(static_cast<Index>(i) * 3 + j);
    sq += std::norm(dot);
  }
  return std::sqrt(sq);
}

CVector admissible_part(const ModeSet& ms, const Theta& theta, const CVector& f) {
  if (f.size() != static_cast<Index>(ms.size()) * 3) throw InputError("source has the wrong size");
  CVector out = f;
  for (std::size_t i = 1; i < ms.size(); ++i) {
    const auto k = fourier::wave_vector(theta, ms.mode(i));
    const double kk = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    Complex dot = 0.0;
    for (int j = 0; j < 3; ++j) dot += k[static_cast<std::size_t>(j)] * f(static_cast<Index>(i) * 3 + j);
    for (int j = 0; j < 3; ++j) out(static_cast<Index>(i) * 3 + j) -= dot * k[static_cast<std::size_t>(j)] / kk;
  }
  return out;
}

EquivalenceReport ehom_equivalence(const CoefficientField& perm_eps, const CoefficientField& perm_mu,
                                   const ModeSet& ms, const Theta& theta, double eta,
                                   const std::vector<CVector>& sources, double tol) {
  require_maxwell(perm_eps, perm_mu, ms);
  if (!(eta > 0.0)) throw InputError("eta must be positive");
  EquivalenceReport rep;
  rep.theta = theta;
  rep.sources = static_cast<int>(sources.size());
  for (std::size_t s = 0; s < sources.size(); ++s) {
    const double g = gradient_component(ms, theta, sources[s]);
    rep.max_gradient_component = std::max(rep.max_gradient_component, g);
    if (g > 1e-12 * std::max(1.0, sources[s].norm())) {
      throw HypothesisError("source " + std::to_string(s) + " has gradient component " + std::to_string(g), g);
    }
  }
  rep.eps_hom = homogenised_perm(perm_eps, ms, theta);
  rep.mu_hom = homogenised_perm(perm_mu, ms, theta);

  const Index count = static_cast<Index>(sources.size());
  std::vector<double> diff_sq(sources.size(), 0.0), norm_sq(sources.size(), 0.0);
  for (const auto& block : blocks_for(perm_eps, perm_mu, ms)) {
    const MaxwellFibre mf = build_maxwell_fibre(perm_eps, perm_mu, ms, theta, block);
    const Index m = static_cast<Index>(block.size()) * 3;
    CMatrix rhs = CMatrix::Zero(2 * m, count);
    for (Index s = 0; s < count; ++s) {
      for (std::size_t b = 0; b < block.size(); ++b) {
        rhs.col(s).segment(static_cast<Index>(b) * 3, 3) = sources[static_cast<std::size_t>(s)].segment(static_cast<Index>(block[b]) * 3, 3);
      }
    }
    // compressed limit system
    const CMatrix& pn = mf.n_proj;
    const CMatrix m_limit = block_diag(pn * mf.perm_eps * pn, pn * mf.perm_mu * pn);
    const CMatrix x = (m_limit + mf.fibre.a / eta).partialPivLu().solve(rhs);

    // homogenised system on constants (+) r, gradients rebuilt afterwards
    const bool has_zero = block.front() == 0;
    const CMatrix nb = fourier::n_theta_basis(ms, theta, block);
    const Index n1 = has_zero ? 3 : 0;
    const CMatrix grads = nb.rightCols(nb.cols() - n1);
    const CMatrix r = orthonormal_complement(nb);
    CMatrix w(m, n1 + r.cols());
    w << nb.leftCols(n1), r;
    const Index wd = w.cols();
    CMatrix m_hom = CMatrix::Zero(2 * wd, 2 * wd);
    if (has_zero) {
      m_hom.topLeftCorner(3, 3) = rep.eps_hom;
      m_hom.block(wd, wd, 3, 3) = rep.mu_hom;
    }
    const CMatrix curl_w = w.adjoint() * mf.curl * w;
    const CMatrix w2 = block_diag(w, w);
    const CMatrix y = (m_hom + skew_pair(curl_w) / eta).partialPivLu().solve(w2.adjoint() * rhs);
    CMatrix x_hom = w2 * y;
    if (has_zero && grads.cols() > 0) {
      for (int part = 0; part < 2; ++part) {
        const CMatrix& perm = part == 0 ? mf.perm_eps : mf.perm_mu;
        const CMatrix k = nb.adjoint() * perm * nb;
        const Index kg = grads.cols();
        const CMatrix corr = -k.bottomRightCorner(kg, kg).partialPivLu().solve(k.bottomLeftCorner(kg, 3));
        const CMatrix gamma = y.middleRows(part * wd, 3);
        x_hom.middleRows(part * m, m) += grads * (corr * gamma);
      }
    }
    for (Index s = 0; s < count; ++s) {
      diff_sq[static_cast<std::size_t>(s)] += (x.col(s) - x_hom.col(s)).squaredNorm();
      norm_sq[static_cast<std::size_t>(s)] += x.col(s).squaredNorm();
    }
  }
  for (std::size_t s = 0; s < sources.size(); ++s) {
    const double gap = norm_sq[s] > 0.0 ? std::sqrt(diff_sq[s] / norm_sq[s]) : std::sqrt(diff_sq[s]);
    rep.max_gap = std::max(rep.max_gap, gap);
  }
  rep.pass = rep.max_gap <= tol;
  return rep;
}

EquivalenceReport ehom_equivalence(const CoefficientField& perm_eps, const CoefficientField& perm_mu,
                                   const ModeSet& ms, const Theta& theta, double eta, std::uint64_t seed,
                                   int count, double tol) {
  Rng rng(seed);
  std::vector<CVector> sources;
  for (int s = 0; s < count; ++s) {
    CVector f = admissible_part(ms, theta, rng.gaussian(static_cast<Index>(ms.size()) * 3));
    sources.push_back(f / f.norm());
  }
  return ehom_equivalence(perm_eps, perm_mu, ms, theta, eta, sources, tol);
}

CurlIdentityReport curl_identities(const ModeSet& ms, const Theta& theta) {
  if (ms.dim() != 3 || ms.components() != 3) throw InputError("curl identities need d = 3 and n = 3");
  CurlIdentityReport rep;
  const CMatrix at_zero = i_cross(fourier::wave_vector(theta, {0, 0, 0}));
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const ModeBlock block{i};
    const CMatrix c = fourier::curl_theta_matrix(ms, theta, block);
    const CMatrix pn = fourier::projection_n_theta(ms, theta, block);
    // pi_{n1} is the identity at mode 0 and zero elsewhere
    const CMatrix p1 = i == 0 ? CMatrix(CMatrix::Identity(3, 3)) : CMatrix(CMatrix::Zero(3, 3));
    const CMatrix expected = i == 0 ? CMatrix(at_zero * p1) : CMatrix::Zero(3, 3);
    rep.hermitian = std::max(rep.hermitian, max_abs(c - c.adjoint()));
    rep.compressed = std::max(rep.compressed, max_abs(c * pn - expected));
    rep.commutator = std::max(rep.commutator, max_abs(pn * c - c * pn));
    rep.gradient_kernel = std::max(rep.gradient_kernel, max_abs(c * (pn - p1)));
  }
  return rep;
}

PoincareReport curl_poincare_check(const ModeSet& ms, std::span<const Theta> grid, double tol) {
  if (ms.dim() != 3 || ms.components() != 3) throw InputError("curl_poincare_check needs d = 3 and n = 3");
  PoincareReport rep;
  rep.overall_min = std::numeric_limits<double>::infinity();
  for (const Theta& theta : grid) {
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < ms.size(); ++i) {
      const ModeBlock block{i};
      const CMatrix r = orthonormal_complement(fourier::n_theta_basis(ms, theta, block));
      lo = std::min(lo, min_singular_value(r.adjoint() * fourier::curl_theta_matrix(ms, theta, block) * r));
    }
    rep.min_singular.push_back(lo);
    rep.overall_min = std::min(rep.overall_min, lo);
  }
  rep.pass = rep.overall_min >= std::numbers::pi - tol;
  return rep;
}

}  // namespace fibrehom::maxwell
