#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fibrehom {

enum class Verdict { pass, fail, flagged };

const char* to_string(Verdict v);

/// One (theta, eps) cell of a sweep.
struct SweepRow {
  std::vector<double> theta;
  double eps = 0.0;
  double err = 0.0;
  double bound = std::numeric_limits<double>::quiet_NaN();  // NaN: nothing asserted
  Verdict verdict = Verdict::pass;
  double c = std::numeric_limits<double>::quiet_NaN();
  double m_norm = std::numeric_limits<double>::quiet_NaN();
  double c_r = std::numeric_limits<double>::quiet_NaN();
  double kappa = std::numeric_limits<double>::quiet_NaN();
  int n_trunc = 0;
  double cond_max = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::pair<std::string, double>> aux;

  double aux_value(const std::string& name) const;  // NaN if absent
};

/// Sweep-level assertion beyond the per-row verdicts (slope window,
/// monotonicity, truncation sensitivity, ...).
struct SweepCheck {
  std::string name;
  double value = 0.0;
  bool pass = true;
};

struct SweepResult {
  std::string name;
  std::string config_digest;
  std::vector<SweepRow> rows;
  double slope = std::numeric_limits<double>::quiet_NaN();
  double slope_residual = std::numeric_limits<double>::quiet_NaN();
  double wall_seconds = 0.0;
  std::vector<SweepCheck> checks;

  bool all_pass() const;
  /// max err/bound over rows that carry a bound (NaN when none do).
  double max_err_ratio() const;
  /// theta lexicographic, then eps descending.
  void sort_rows();
  const SweepCheck* find_check(const std::string& name) const;
  /// Per distinct eps (descending): max err over rows.
  std::vector<std::pair<double, double>> max_err_by_eps() const;
};

struct SlopeFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();  // RMS in log space
};

/// Least-squares fit of log(y) against log(x); non-positive y are skipped.
SlopeFit fit_loglog(std::span<const double> x, std::span<const double> y);

/// Fits the slope of max_err_by_eps() into result.slope / slope_residual.
void fit_sweep_slope(SweepResult& result);

std::vector<double> log_spaced(double start, double stop, int count);

/// Worker count: FIBREHOM_WORKERS if set and positive, else hardware concurrency.
int worker_count();

/// Runs body(i) for i in [0, count) on worker_count() threads. Each index
/// is handled exactly once; the first exception is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace fibrehom
