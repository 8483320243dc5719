#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fibrehom/cell.hpp"
#include "fibrehom/coefficient.hpp"
#include "fibrehom/sweep.hpp"
#include "fibrehom/types.hpp"

namespace fibrehom::io {

enum class ProblemKind { abstract, elliptic, maxwell, ahom_table };

const char* to_string(ProblemKind kind);

struct LogSpec {
  double start = 1e-3;
  double stop = 1e-1;
  int count = 5;
  std::vector<double> values() const { return log_spaced(start, stop, count); }
};

/// Parameter ranges for seeded random abstract families.
struct AbstractSpec {
  int families = 200;
  int fibres = 2;
  int dim_min = 4;
  int dim_max = 40;
  double c_min = 0.1;
  double c_max = 2.0;
  double gap_min = 0.5;
  double gap_max = 4.0;
};

struct RunConfig {
  ProblemKind kind = ProblemKind::elliptic;
  int d = 1;
  int n = 1;
  int n_trunc = 8;
  std::map<std::string, std::filesystem::path> coefficients;  // a, s or eps, mu
  std::vector<int> theta_points{5};
  LogSpec eps;  // eta for Maxwell; fractions of the threshold for abstract runs
  Tolerances tols;
  double tol_trunc = 1e-9;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
  bool doubling_check = true;
  int refine_to = 0;
  bool flux_random = true;  // seeded unit source over all modes; else mode 0
  int flux_component = 0;
  bool scaled_probes = true;
  double equivalence_eta = 0.1;
  int equivalence_sources = 20;
  AbstractSpec abstract;
};

/// Parses the YAML config; relative paths are resolved against base_dir
/// and coefficient files must exist.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

/// Hex FNV-1a 64 of the bytes.
std::string content_digest(std::string_view bytes);

/// Digest of the resolved config and the coefficient file contents. The
/// output directory does not enter.
std::string config_digest(const RunConfig& cfg);

/// Coefficient file grammar (one item per line, '#' starts a comment):
///   dimension <d>
///   shape <rows> <cols>
///   nu <declared coercivity>
///   real <true|false>
///   mode <z_1> ... <z_d> : <entry> ... (rows*cols entries, row-major)
/// An entry is <re> or <re>,<im>. Header lines precede mode lines.
fourier::CoefficientField parse_coefficient(const std::string& text, const std::string& origin = "<string>");
fourier::CoefficientField load_coefficient(const std::filesystem::path& path);
std::string format_coefficient(const fourier::CoefficientField& coef);

/// Writes via a temporary sibling and rename.
void write_atomic(const std::filesystem::path& path, std::string_view bytes);

/// 17 significant digits; nan / inf spelled out.
std::string format_double(double v);

/// Fixed columns: theta_1..theta_d, eps, err_opnorm, bound, verdict, c,
/// M_norm, C_R, kappa, n_trunc, cond_max.
std::string sweep_csv(const SweepResult& result, int theta_dim);

/// Disk-backed a^hom(theta) tables keyed by coefficient digest, theta and
/// truncation; entries are stored as hex floats, so a hit returns the
/// computed bits exactly.
class AhomCache {
 public:
  AhomCache(std::filesystem::path dir, std::string coefficient_digest);

  CMatrix get(const fourier::CoefficientField& a, const fourier::ModeSet& ms, const fourier::Theta& theta);
  cell::AhomProvider provider(const fourier::CoefficientField& a, const fourier::ModeSet& ms);
  std::filesystem::path path_for(const fourier::ModeSet& ms, const fourier::Theta& theta) const;

  int hits() const { return hits_.load(); }
  int misses() const { return misses_.load(); }

 private:
  std::filesystem::path dir_;
  std::string digest_;
  std::atomic<int> hits_{0};
  std::atomic<int> misses_{0};
};

struct NamedCheck {
  std::string name;
  double value = 0.0;
  bool pass = true;
};

struct RunOutcome {
  std::string digest;
  std::vector<SweepResult> sweeps;  // the first one is the primary sweep
  std::vector<NamedCheck> reports;  // checks that are not (theta, eps) tables
  bool all_pass() const;
};

/// Dispatches on the problem kind, writes <sweep>.csv files and
/// summary.json into out_dir (created if needed).
RunOutcome run(const RunConfig& cfg);

/// Property suite for a coefficient pair: tensor bounds, route agreement,
/// Lipschitz ratio and the classical-limit bridge.
RunOutcome run_properties(const RunConfig& cfg);

std::string summary_json(const RunOutcome& outcome, const RunConfig& cfg);

}  // namespace fibrehom::io
