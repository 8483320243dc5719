#include <algorithm>
#include <chrono>
#include <cmath>

#include <json.hpp>

#include "fibrehom/abstract.hpp"
#include "fibrehom/elliptic.hpp"
#include "fibrehom/io.hpp"
#include "fibrehom/linalg.hpp"
#include "fibrehom/maxwell.hpp"
#include "fibrehom/random.hpp"

namespace fibrehom::io {

namespace fs = std::filesystem;
using fourier::CoefficientField;
using fourier::ModeSet;
using fourier::Theta;

namespace {

double median(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }), v.end());
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

SweepResult run_abstract(const RunConfig& cfg) {
  const auto& spec = cfg.abstract;
  const std::vector<double> fractions = cfg.eps.values();
  Rng master(cfg.seed);
  SweepResult merged;
  merged.name = "abstract";
  std::vector<double> slopes;
  double worst_residual = 0.0;
  for (int f = 0; f < spec.families; ++f) {
    const int dim = master.integer(spec.dim_min, spec.dim_max);
    const int k = master.integer(0, dim);
    const double c = master.uniform(spec.c_min, spec.c_max);
    const double gap = master.uniform(spec.gap_min, spec.gap_max);
    const std::uint64_t family_seed = cfg.seed * 1000003ull + static_cast<std::uint64_t>(f);
    const auto family = abstract::make_random_family(family_seed, dim, k, c, gap, spec.fibres);
    std::vector<abstract::HypothesisReport> reports;
    for (const auto& fibre : family) reports.push_back(abstract::validate_hypothesis(fibre, cfg.tols));
    const double threshold = abstract::family_budget(reports).eps_threshold;
    std::vector<double> eps;
    for (double q : fractions) eps.push_back(std::isfinite(threshold) ? q * threshold : q);
    SweepResult part = abstract::certify_mtgr(family, eps, cfg.tols);
    slopes.push_back(part.slope);
    if (!std::isnan(part.slope_residual)) worst_residual = std::max(worst_residual, part.slope_residual);
    for (auto& row : part.rows) {
      row.theta.insert(row.theta.begin(), static_cast<double>(f));
      merged.rows.push_back(std::move(row));
    }
  }
  merged.sort_rows();
  merged.slope = median(slopes);
  merged.slope_residual = worst_residual;
  return merged;
}

std::string coefficient_key(const CoefficientField& a) { return content_digest(format_coefficient(a)); }

void run_elliptic(const RunConfig& cfg, RunOutcome& out) {
  const CoefficientField a = load_coefficient(cfg.coefficients.at("a"));
  const CoefficientField s = load_coefficient(cfg.coefficients.at("s"));
  const ModeSet ms(cfg.d, cfg.n, cfg.n_trunc);
  const auto grid = fourier::theta_grid(cfg.theta_points);
  const auto eps = cfg.eps.values();
  AhomCache cache(cfg.out_dir / "cache", coefficient_key(a));
  elliptic::SweepOptions opt;
  opt.doubling_check = cfg.doubling_check;
  opt.tol_trunc = cfg.tol_trunc;
  opt.tols = cfg.tols;
  opt.provider_for = [&](const ModeSet& m) { return cache.provider(a, m); };
  opt.scaled_probes = cfg.scaled_probes;
  out.sweeps.push_back(elliptic::certify_quanthom(a, s, ms, grid, eps, opt));
  opt.doubling_check = false;
  const CVector f = cfg.flux_random ? elliptic::seeded_source(ms, cfg.seed)
                                    : elliptic::mode_zero_source(ms, cfg.flux_component);
  out.sweeps.push_back(elliptic::certify_flux(a, s, ms, grid, eps, f, opt));
}

void run_maxwell(const RunConfig& cfg, RunOutcome& out) {
  const CoefficientField pe = load_coefficient(cfg.coefficients.at("eps"));
  const CoefficientField pm = load_coefficient(cfg.coefficients.at("mu"));
  const ModeSet ms(3, 3, cfg.n_trunc);
  const auto grid = fourier::theta_grid(cfg.theta_points);
  maxwell::MaxwellOptions opt;
  opt.tol_trunc = cfg.tol_trunc;
  opt.tols = cfg.tols;
  opt.refine_to = cfg.refine_to;
  out.sweeps.push_back(maxwell::certify_maxhom(pe, pm, ms, grid, cfg.eps.values(), opt));

  double worst_gap = 0.0, worst_curl = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto rep = maxwell::ehom_equivalence(pe, pm, ms, grid[i], cfg.equivalence_eta, cfg.seed + i,
                                               cfg.equivalence_sources);
    worst_gap = std::max(worst_gap, rep.max_gap);
    const auto ids = maxwell::curl_identities(ms, grid[i]);
    worst_curl = std::max({worst_curl, ids.hermitian, ids.compressed, ids.commutator, ids.gradient_kernel});
  }
  out.reports.push_back({"ehom_equivalence", worst_gap, worst_gap <= 1e-10});
  out.reports.push_back({"curl_identities", worst_curl, worst_curl <= 1e-12});
  const auto poincare = maxwell::curl_poincare_check(ms, grid);
  out.reports.push_back({"curl_poincare", poincare.overall_min, poincare.pass});
}

std::string ahom_table_csv(const std::vector<Theta>& grid, const std::vector<CMatrix>& tensors, int d) {
  std::string csv;
  for (int j = 1; j <= d; ++j) csv += "theta_" + std::to_string(j) + ",";
  csv += "row,col,re,im\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (Index r = 0; r < tensors[i].rows(); ++r) {
      for (Index c = 0; c < tensors[i].cols(); ++c) {
        for (double t : grid[i].values()) csv += format_double(t) + ",";
        csv += std::to_string(r) + "," + std::to_string(c) + "," + format_double(tensors[i](r, c).real()) + "," +
               format_double(tensors[i](r, c).imag()) + "\n";
      }
    }
  }
  return csv;
}

void run_ahom_table(const RunConfig& cfg, RunOutcome& out) {
  const CoefficientField a = load_coefficient(cfg.coefficients.at("a"));
  const ModeSet ms(cfg.d, cfg.n, cfg.n_trunc);
  const auto grid = fourier::theta_grid(cfg.theta_points);
  AhomCache cache(cfg.out_dir / "cache", coefficient_key(a));
  std::vector<CMatrix> tensors(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) { tensors[i] = cache.get(a, ms, grid[i]); });
  write_atomic(cfg.out_dir / "ahom.csv", ahom_table_csv(grid, tensors, cfg.d));
  out.sweeps.push_back(cell::lipschitz_sweep(a, ms, grid, cache.provider(a, ms)));
}

}  // namespace

bool RunOutcome::all_pass() const {
  for (const auto& s : sweeps) {
    if (!s.all_pass()) return false;
  }
  for (const auto& r : reports) {
    if (!r.pass) return false;
  }
  return true;
}

std::string summary_json(const RunOutcome& outcome, const RunConfig& cfg) {
  using json = nlohmann::ordered_json;
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json j;
  j["config_digest"] = outcome.digest;
  j["problem"] = to_string(cfg.kind);
  const SweepResult* primary = outcome.sweeps.empty() ? nullptr : &outcome.sweeps.front();
  j["slope"] = primary ? num(primary->slope) : json(nullptr);
  j["slope_residual"] = primary ? num(primary->slope_residual) : json(nullptr);
  j["max_err_ratio"] = primary ? num(primary->max_err_ratio()) : json(nullptr);
  j["all_pass"] = outcome.all_pass();
  json sweeps = json::object();
  for (const auto& s : outcome.sweeps) {
    json e;
    e["rows"] = s.rows.size();
    e["slope"] = num(s.slope);
    e["slope_residual"] = num(s.slope_residual);
    e["max_err_ratio"] = num(s.max_err_ratio());
    e["all_pass"] = s.all_pass();
    std::size_t failed = 0, flagged = 0;
    for (const auto& r : s.rows) {
      failed += r.verdict == Verdict::fail;
      flagged += r.verdict == Verdict::flagged;
    }
    e["failed_rows"] = failed;
    e["flagged_rows"] = flagged;
    if (!s.rows.empty()) {
      e["budget"] = {{"c", num(s.rows.front().c)},
                     {"M_norm", num(s.rows.front().m_norm)},
                     {"C_R", num(s.rows.front().c_r)},
                     {"kappa", num(s.rows.front().kappa)}};
    }
    json checks = json::object();
    for (const auto& c : s.checks) checks[c.name] = {{"value", num(c.value)}, {"pass", c.pass}};
    e["checks"] = checks;
    sweeps[s.name] = e;
  }
  j["sweeps"] = sweeps;
  json reports = json::object();
  for (const auto& r : outcome.reports) reports[r.name] = {{"value", num(r.value)}, {"pass", r.pass}};
  j["reports"] = reports;
  return j.dump(2) + "\n";
}

namespace {

void persist(const RunConfig& cfg, RunOutcome& outcome) {
  const int theta_dim = cfg.kind == ProblemKind::abstract ? 2 : cfg.d;
  for (auto& s : outcome.sweeps) {
    s.config_digest = outcome.digest;
    write_atomic(cfg.out_dir / (s.name + ".csv"), sweep_csv(s, theta_dim));
  }
  write_atomic(cfg.out_dir / "summary.json", summary_json(outcome, cfg));
}

void require_out(const RunConfig& cfg) {
  if (cfg.out_dir.empty()) throw InputError("no output directory (set 'output' or pass --out)");
  fs::create_directories(cfg.out_dir);
}

}  // namespace

RunOutcome run(const RunConfig& cfg) {
  require_out(cfg);
  const auto start = std::chrono::steady_clock::now();
  RunOutcome outcome;
  outcome.digest = config_digest(cfg);
  switch (cfg.kind) {
    case ProblemKind::abstract: outcome.sweeps.push_back(run_abstract(cfg)); break;
    case ProblemKind::elliptic: run_elliptic(cfg, outcome); break;
    case ProblemKind::maxwell: run_maxwell(cfg, outcome); break;
    case ProblemKind::ahom_table: run_ahom_table(cfg, outcome); break;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (auto& s : outcome.sweeps) s.wall_seconds = secs;
  persist(cfg, outcome);
  return outcome;
}

RunOutcome run_properties(const RunConfig& cfg) {
  if (cfg.kind != ProblemKind::ahom_table && cfg.kind != ProblemKind::elliptic) {
    throw InputError("properties needs an ahom_table or elliptic config");
  }
  require_out(cfg);
  RunOutcome outcome;
  outcome.digest = config_digest(cfg);
  const CoefficientField a = load_coefficient(cfg.coefficients.at("a"));
  const CoefficientField s = cfg.coefficients.count("s")
                                 ? load_coefficient(cfg.coefficients.at("s"))
                                 : fourier::constant_coefficient(cfg.d, CMatrix::Identity(cfg.n, cfg.n), 1.0);
  const ModeSet ms(cfg.d, cfg.n, cfg.n_trunc);
  const auto grid = fourier::theta_grid(cfg.theta_points);
  AhomCache cache(cfg.out_dir / "cache", coefficient_key(a));

  std::vector<cell::HomogenisedTensor> tensors;
  for (const auto& theta : grid) tensors.push_back(cell::assemble_ahom(a, ms, theta));
  double route = 0.0, sesq = 0.0, cache_gap = 0.0;
  bool bounds = true;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const CMatrix inv = cell::ahom_inverse_via_projection(a, ms, grid[i]);
    route = std::max(route, relative_gap(checked_inverse(inv, "projected inverse"), tensors[i].entries));
    sesq = std::max(sesq, tensors[i].sesquilinear_gap);
    bounds = bounds && cell::check_tensor_bounds(tensors[i], a, ms).pass();
    cache_gap = std::max(cache_gap, max_abs(cache.get(a, ms, grid[i]) - tensors[i].entries));
  }
  outcome.reports.push_back({"tensor_bounds", bounds ? 1.0 : 0.0, bounds});
  outcome.reports.push_back({"route_agreement", route, route <= 1e-9});
  outcome.reports.push_back({"sesquilinear_agreement", sesq, sesq <= 1e-9});
  outcome.reports.push_back({"cache_agreement", cache_gap, cache_gap <= 1e-14});

  outcome.sweeps.push_back(cell::lipschitz_sweep(a, ms, grid, cache.provider(a, ms)));
  outcome.sweeps.push_back(cell::classical_limit_check(a, s, ms, grid, cfg.eps.values(), cache.provider(a, ms)));
  persist(cfg, outcome);
  return outcome;
}

}  // namespace fibrehom::io
