#include "fibrehom/abstract.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fibrehom/linalg.hpp"
#include "fibrehom/random.hpp"

namespace fibrehom::abstract {

bool HypothesisReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const ConditionCheck& c) { return c.pass; });
}

const ConditionCheck& HypothesisReport::check(const std::string& key) const {
  for (const auto& c : checks) {
    if (c.name == key) return c;
  }
  throw InputError("no hypothesis check named " + key);
}

namespace {

void require_shapes(const OperatorFamilyFibre& f) {
  const Index dim = f.m.rows();
  if (dim < 1) throw InputError("fibre dimension must be at least 1");
  if (f.m.cols() != dim) throw InputError("M is not square");
  if (f.a.rows() != dim || f.a.cols() != dim) throw InputError("A does not match the shape of M");
  if (f.n_basis.rows() != dim) throw InputError("N basis has the wrong row count");
  if (f.n_basis.cols() > dim) throw InputError("N basis has more columns than the fibre dimension");
}

double scale_of(const CMatrix& x) { return std::max(1.0, max_abs(x)); }

}  // namespace

HypothesisReport validate_hypothesis(const OperatorFamilyFibre& f, const Tolerances& tols) {
  require_shapes(f);
  HypothesisReport rep;
  const double a_scale = scale_of(f.a);

  const double skew = max_abs(f.a + f.a.adjoint()) / a_scale;
  rep.checks.push_back({"skew_hermitian", skew, skew <= tols.sym});

  rep.c_lower = min_real_part(f.m);
  rep.checks.push_back({"accretive", rep.c_lower, rep.c_lower > 0.0});
  rep.m_norm = op_norm(f.m);

  const Index k = f.n_basis.cols();
  const double orth = max_abs(f.n_basis.adjoint() * f.n_basis - CMatrix::Identity(k, k));
  rep.checks.push_back({"orthonormal_basis", orth, orth <= tols.orth});

  const CMatrix iota_r = orthonormal_complement(f.n_basis);
  const double nr = max_abs(f.n_basis.adjoint() * f.a * iota_r) / a_scale;
  const double rn = max_abs(iota_r.adjoint() * f.a * f.n_basis) / a_scale;
  const double commute = std::max(nr, rn);
  rep.checks.push_back({"commutation", commute, commute <= tols.sym});

  if (iota_r.cols() == 0) {
    rep.c_r = 0.0;
    rep.checks.push_back({"restricted_invertibility", 0.0, true});
  } else {
    const CMatrix a_r = iota_r.adjoint() * f.a * iota_r;
    const RVector sv = singular_values(a_r);
    const double smin = sv(sv.size() - 1);
    const double smax = sv(0);
    const bool ok = smin > tols.num * std::max(1.0, smax);
    rep.c_r = ok ? 1.0 / smin : std::numeric_limits<double>::infinity();
    rep.checks.push_back({"restricted_invertibility", smin, ok});
  }
  return rep;
}

FibreSplit split_fibre(const OperatorFamilyFibre& f) {
  require_shapes(f);
  FibreSplit s;
  s.iota_n = f.n_basis;
  s.iota_r = orthonormal_complement(f.n_basis);
  s.m_nn = s.iota_n.adjoint() * f.m * s.iota_n;
  s.a_nn = s.iota_n.adjoint() * f.a * s.iota_n;
  s.a_r_inv = checked_inverse(s.iota_r.adjoint() * f.a * s.iota_r, "A restricted to R");
  return s;
}

CMatrix resolvent(const OperatorFamilyFibre& f, double eps, double* cond_estimate) {
  require_shapes(f);
  if (!(eps > 0.0)) throw InputError("eps must be positive");
  try {
    return checked_inverse(f.m + f.a / eps, "M + A/eps", cond_estimate);
  } catch (const HypothesisError&) {
    const double c = min_real_part(f.m);
    throw HypothesisError("M + A/eps is singular; smallest eigenvalue of Re M is " + std::to_string(c), c);
  }
}

CMatrix compressed_resolvent(const FibreSplit& s, double eps) {
  if (!(eps > 0.0)) throw InputError("eps must be positive");
  const CMatrix b_n_inv = checked_inverse(s.m_nn + s.a_nn / eps, "B_eps compressed to N");
  return s.iota_n * b_n_inv * s.iota_n.adjoint();
}

CMatrix limit_resolvent(const FibreSplit& s, double eps) {
  return compressed_resolvent(s, eps) + eps * (s.iota_r * s.a_r_inv * s.iota_r.adjoint());
}

CMatrix limit_resolvent(const OperatorFamilyFibre& f, double eps) {
  return limit_resolvent(split_fibre(f), eps);
}

CMatrix surrogate_resolvent(const OperatorFamilyFibre& f, double eps, const CMatrix& t) {
  require_shapes(f);
  if (t.rows() != f.dim() || t.cols() != f.dim()) throw InputError("surrogate T has the wrong shape");
  FibreSplit s;
  s.iota_n = f.n_basis;
  s.iota_r = orthonormal_complement(f.n_basis);
  s.m_nn = s.iota_n.adjoint() * f.m * s.iota_n;
  s.a_nn = s.iota_n.adjoint() * f.a * s.iota_n;
  const CMatrix t_r = s.iota_r.adjoint() * t * s.iota_r;
  return compressed_resolvent(s, eps) + eps * (s.iota_r * t_r * s.iota_r.adjoint());
}

double ErrorBudget::kappa_compressed() const {
  const double q = 1.0 + m_norm / c;
  return 2.0 * c_r * q * q;
}

ErrorBudget kappa_constant(double c, double m_norm, double c_r) {
  if (!(c > 0.0)) throw InputError("accretivity constant c must be positive");
  if (m_norm < 0.0 || c_r < 0.0) throw InputError("norms must be non-negative");
  ErrorBudget b;
  b.c = c;
  b.m_norm = m_norm;
  b.c_r = c_r;
  const double q = 1.0 + m_norm / c;
  b.kappa = 2.0 * c_r * q * q + c_r;
  const double prod = c_r * m_norm;
  b.eps_threshold = prod == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / (2.0 * prod);
  return b;
}

ErrorBudget family_budget(std::span<const HypothesisReport> reports) {
  if (reports.empty()) throw InputError("family_budget: empty family");
  double c = std::numeric_limits<double>::infinity();
  double m = 0.0, cr = 0.0;
  for (const auto& r : reports) {
    c = std::min(c, r.c_lower);
    m = std::max(m, r.m_norm);
    cr = std::max(cr, r.c_r);
  }
  return kappa_constant(c, m, cr);
}

namespace {

std::vector<HypothesisReport> validate_all(std::span<const OperatorFamilyFibre> family,
                                           const Tolerances& tols) {
  std::vector<HypothesisReport> reports(family.size());
  parallel_for(family.size(), [&](std::size_t i) { reports[i] = validate_hypothesis(family[i], tols); });
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (!reports[i].pass()) {
      for (const auto& c : reports[i].checks) {
        if (!c.pass) {
          throw HypothesisError("fibre " + std::to_string(i) + " fails " + c.name + " (residual " +
                                    std::to_string(c.residual) + ")",
                                c.residual);
        }
      }
    }
  }
  return reports;
}

void fill_budget(SweepRow& row, const ErrorBudget& b) {
  row.c = b.c;
  row.m_norm = b.m_norm;
  row.c_r = b.c_r;
  row.kappa = b.kappa;
}

}  // namespace

SweepResult certify_mtgr(std::span<const OperatorFamilyFibre> family, std::span<const double> eps_list,
                         const Tolerances& tols) {
  SweepResult out;
  out.name = "abstract";
  const auto reports = validate_all(family, tols);
  const ErrorBudget budget = family_budget(reports);
  const double kappa_n = budget.kappa_compressed();

  std::vector<std::vector<SweepRow>> cells(family.size());
  parallel_for(family.size(), [&](std::size_t i) {
    const FibreSplit split = split_fibre(family[i]);
    for (double eps : eps_list) {
      SweepRow row;
      row.theta = {static_cast<double>(i)};
      row.eps = eps;
      double cond = 0.0;
      const CMatrix exact = resolvent(family[i], eps, &cond);
      const CMatrix compressed = compressed_resolvent(split, eps);
      const CMatrix limit = compressed + eps * (split.iota_r * split.a_r_inv * split.iota_r.adjoint());
      row.err = op_norm(exact - limit);
      row.bound = budget.kappa * eps;
      const double err_n = op_norm(exact - compressed);
      const double bound_n = kappa_n * eps;
      fill_budget(row, budget);
      row.cond_max = cond;
      row.aux = {{"C_R_fibre", reports[i].c_r}, {"err_compressed", err_n}, {"bound_compressed", bound_n}};
      if (eps >= budget.eps_threshold) {
        row.verdict = Verdict::flagged;
      } else {
        const bool ok = row.err <= row.bound + tols.num && err_n <= bound_n + tols.num;
        row.verdict = ok ? Verdict::pass : Verdict::fail;
      }
      cells[i].push_back(std::move(row));
    }
  });
  for (auto& c : cells) {
    for (auto& r : c) out.rows.push_back(std::move(r));
  }
  out.sort_rows();
  fit_sweep_slope(out);
  return out;
}

SweepResult certify_hom2(std::span<const OperatorFamilyFibre> family,
                         std::span<const OperatorFamilyFibre> other, std::span<const double> eps_list,
                         const Tolerances& tols) {
  if (family.size() != other.size()) throw InputError("certify_hom2: families differ in size");
  SweepResult out;
  out.name = "abstract_pair";
  const auto reports = validate_all(family, tols);
  const auto other_reports = validate_all(other, tols);
  const ErrorBudget b1 = family_budget(reports);
  const ErrorBudget b2 = family_budget(other_reports);
  const double kappa = b1.kappa + b2.kappa;
  const double threshold = std::min(b1.eps_threshold, b2.eps_threshold);

  double shared_gap = 0.0;
  for (std::size_t i = 0; i < family.size(); ++i) {
    const CMatrix& nb = family[i].n_basis;
    if (other[i].n_basis.rows() != nb.rows() || max_abs(other[i].n_basis - nb) > tols.orth) {
      throw InputError("certify_hom2: fibre " + std::to_string(i) + " has a different N basis");
    }
    const CMatrix pn = nb * nb.adjoint();
    shared_gap = std::max(shared_gap, max_abs(pn * (family[i].m - other[i].m) * pn) /
                                          std::max(1.0, max_abs(family[i].m)));
  }
  out.checks.push_back({"shared_N_compression", shared_gap, shared_gap <= tols.sym});

  std::vector<std::vector<SweepRow>> cells(family.size());
  parallel_for(family.size(), [&](std::size_t i) {
    for (double eps : eps_list) {
      SweepRow row;
      row.theta = {static_cast<double>(i)};
      row.eps = eps;
      double c1 = 0.0, c2 = 0.0;
      row.err = op_norm(resolvent(family[i], eps, &c1) - resolvent(other[i], eps, &c2));
      row.bound = kappa * eps;
      fill_budget(row, b1);
      row.kappa = kappa;
      row.cond_max = std::max(c1, c2);
      if (eps >= threshold) {
        row.verdict = Verdict::flagged;
      } else {
        row.verdict = row.err <= row.bound + tols.num ? Verdict::pass : Verdict::fail;
      }
      cells[i].push_back(std::move(row));
    }
  });
  for (auto& c : cells) {
    for (auto& r : c) out.rows.push_back(std::move(r));
  }
  out.sort_rows();
  fit_sweep_slope(out);
  return out;
}

namespace {

// Accretive matrix with Hermitian part >= 0: B B^H plus a skew part.
CMatrix random_accretive(Rng& rng, Index dim, double scale) {
  const double norm = 1.0 / std::sqrt(static_cast<double>(std::max<Index>(dim, 1)));
  const CMatrix b = rng.gaussian(dim, dim) * norm;
  const CMatrix g = rng.gaussian(dim, dim) * norm;
  return scale * (b * b.adjoint() + 0.5 * (g - g.adjoint()));
}

}  // namespace

std::vector<OperatorFamilyFibre> make_random_family(std::uint64_t seed, int dim, int k, double c,
                                                    double spectral_gap, int count) {
  if (dim < 1 || k < 0 || k > dim) throw InputError("make_random_family: need 0 <= k <= dim, dim >= 1");
  if (!(c > 0.0) || !(spectral_gap > 0.0)) throw InputError("make_random_family: c and gap must be positive");
  if (count < 1) throw InputError("make_random_family: count must be positive");
  Rng rng(seed);
  std::vector<OperatorFamilyFibre> family;
  family.reserve(static_cast<std::size_t>(count));
  for (int f = 0; f < count; ++f) {
    const CMatrix q = rng.unitary(dim);
    const Index r = dim - k;
    CMatrix a_r = CMatrix::Zero(r, r);
    if (r > 0) {
      const CMatrix u = rng.unitary(r);
      CVector spectrum(r);
      for (Index j = 0; j < r; ++j) {
        const double mag = spectral_gap * (1.0 + std::abs(rng.normal()));
        spectrum(j) = Complex(0.0, rng.uniform(0.0, 1.0) < 0.5 ? -mag : mag);
      }
      a_r = u * spectrum.asDiagonal() * u.adjoint();
    }
    CMatrix a_core = CMatrix::Zero(dim, dim);
    a_core.bottomRightCorner(r, r) = a_r;
    if (k > 0) {
      // A may act inside N as well; only the N/R coupling has to vanish.
      const CMatrix g = rng.gaussian(k, k);
      a_core.topLeftCorner(k, k) = 0.5 * (g - g.adjoint());
    }
    OperatorFamilyFibre fibre;
    fibre.a = q * a_core * q.adjoint();
    fibre.a = 0.5 * (fibre.a - fibre.a.adjoint());
    fibre.m = c * CMatrix::Identity(dim, dim) + random_accretive(rng, dim, 1.0);
    fibre.n_basis = q.leftCols(k);
    family.push_back(std::move(fibre));
  }
  return family;
}

OperatorFamilyFibre perturb_on_complement(const OperatorFamilyFibre& fibre, std::uint64_t seed,
                                          double scale) {
  Rng rng(seed);
  const CMatrix iota_r = orthonormal_complement(fibre.n_basis);
  OperatorFamilyFibre out = fibre;
  out.m += iota_r * random_accretive(rng, iota_r.cols(), scale) * iota_r.adjoint();
  return out;
}

}  // namespace fibrehom::abstract
