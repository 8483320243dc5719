#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "fibrehom/io.hpp"

namespace fibrehom::io {

namespace fs = std::filesystem;

namespace {

std::string where(const YAML::Node& node) {
  const auto mark = node.Mark();
  if (mark.is_null()) return "";
  return " (line " + std::to_string(mark.line + 1) + ")";
}

void reject_unknown(const YAML::Node& map, const std::set<std::string>& allowed, const std::string& section) {
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw InputError("unknown key '" + key + "' in " + section + where(kv.first));
  }
}

template <typename T>
T read(const YAML::Node& map, const std::string& key, const T& fallback, const std::string& section) {
  const YAML::Node node = map[key];
  if (!node) return fallback;
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw InputError("cannot read " + section + "." + key + where(node));
  }
}

template <typename T>
T require(const YAML::Node& map, const std::string& key, const std::string& section) {
  if (!map[key]) throw InputError("missing " + section + "." + key + where(map));
  return read<T>(map, key, T{}, section);
}

void read_range(const YAML::Node& map, const std::string& key, double& lo, double& hi) {
  const YAML::Node node = map[key];
  if (!node) return;
  if (!node.IsSequence() || node.size() != 2) throw InputError("abstract." + key + " must be [lo, hi]" + where(node));
  lo = node[0].as<double>();
  hi = node[1].as<double>();
  if (!(lo > 0.0) || hi < lo) throw InputError("abstract." + key + " must satisfy 0 < lo <= hi" + where(node));
}

ProblemKind parse_kind(const std::string& s, const YAML::Node& node) {
  if (s == "abstract") return ProblemKind::abstract;
  if (s == "elliptic") return ProblemKind::elliptic;
  if (s == "maxwell") return ProblemKind::maxwell;
  if (s == "ahom_table") return ProblemKind::ahom_table;
  throw InputError("problem must be abstract, elliptic, maxwell or ahom_table" + where(node));
}

void append_field(std::string& out, const std::string& key, const std::string& value) {
  out += key;
  out += '=';
  out += value;
  out += '\n';
}

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

}  // namespace

const char* to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::abstract: return "abstract";
    case ProblemKind::elliptic: return "elliptic";
    case ProblemKind::maxwell: return "maxwell";
    case ProblemKind::ahom_table: return "ahom_table";
  }
  return "?";
}

RunConfig parse_config(const std::string& text, const fs::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& ex) {
    throw InputError(std::string("config parse error: ") + ex.what());
  }
  if (!root.IsMap()) throw InputError("config must be a mapping of sections");
  reject_unknown(root,
                 {"problem", "d", "n", "n_trunc", "seed", "coefficients", "theta_grid", "eps", "tolerances",
                  "checks", "abstract", "output"},
                 "config");
  RunConfig cfg;
  cfg.kind = parse_kind(require<std::string>(root, "problem", "config"), root["problem"]);
  cfg.d = read<int>(root, "d", cfg.d, "config");
  cfg.n = read<int>(root, "n", cfg.n, "config");
  cfg.n_trunc = read<int>(root, "n_trunc", cfg.n_trunc, "config");
  cfg.seed = read<std::uint64_t>(root, "seed", cfg.seed, "config");
  if (cfg.d < 1 || cfg.d > 3) throw InputError("d must be 1, 2 or 3");
  if (cfg.n < 1 || cfg.n_trunc < 1) throw InputError("n and n_trunc must be positive");

  if (const YAML::Node coefs = root["coefficients"]) {
    if (!coefs.IsMap()) throw InputError("coefficients must map names to files" + where(coefs));
    reject_unknown(coefs, {"a", "s", "eps", "mu"}, "coefficients");
    for (const auto& kv : coefs) {
      fs::path p = kv.second.as<std::string>();
      if (p.is_relative()) p = base_dir / p;
      if (!fs::exists(p)) throw InputError("coefficient file not found: " + p.string() + where(kv.second));
      cfg.coefficients[kv.first.as<std::string>()] = p.lexically_normal();
    }
  }
  auto need = [&](const std::string& name) {
    if (!cfg.coefficients.count(name)) throw InputError("problem " + std::string(to_string(cfg.kind)) +
                                                        " needs coefficients." + name);
  };
  switch (cfg.kind) {
    case ProblemKind::elliptic: need("a"); need("s"); break;
    case ProblemKind::ahom_table: need("a"); break;
    case ProblemKind::maxwell:
      need("eps");
      need("mu");
      if (cfg.d != 3 || cfg.n != 3) throw InputError("maxwell runs need d = 3 and n = 3");
      break;
    case ProblemKind::abstract: break;
  }

  if (const YAML::Node grid = root["theta_grid"]) {
    cfg.theta_points = grid.as<std::vector<int>>();
  } else {
    cfg.theta_points.assign(static_cast<std::size_t>(cfg.d), 5);
  }
  if (cfg.kind != ProblemKind::abstract && static_cast<int>(cfg.theta_points.size()) != cfg.d) {
    throw InputError("theta_grid needs one point count per dimension");
  }
  for (int p : cfg.theta_points) {
    if (p < 1) throw InputError("theta_grid counts must be positive");
  }

  if (const YAML::Node e = root["eps"]) {
    reject_unknown(e, {"start", "stop", "count"}, "eps");
    cfg.eps.start = require<double>(e, "start", "eps");
    cfg.eps.stop = require<double>(e, "stop", "eps");
    cfg.eps.count = require<int>(e, "count", "eps");
  }
  if (!(cfg.eps.start > 0.0) || !(cfg.eps.stop > 0.0) || cfg.eps.count < 1) {
    throw InputError("eps needs positive start, stop and count");
  }

  if (const YAML::Node t = root["tolerances"]) {
    reject_unknown(t, {"sym", "orth", "num", "trunc"}, "tolerances");
    cfg.tols.sym = read<double>(t, "sym", cfg.tols.sym, "tolerances");
    cfg.tols.orth = read<double>(t, "orth", cfg.tols.orth, "tolerances");
    cfg.tols.num = read<double>(t, "num", cfg.tols.num, "tolerances");
    cfg.tol_trunc = read<double>(t, "trunc", cfg.tol_trunc, "tolerances");
  }

  if (const YAML::Node c = root["checks"]) {
    reject_unknown(c, {"doubling", "refine_to", "flux_source", "flux_component", "scaled_probes", "equivalence_eta",
                    "equivalence_sources"},
                   "checks");
    cfg.doubling_check = read<bool>(c, "doubling", cfg.doubling_check, "checks");
    cfg.refine_to = read<int>(c, "refine_to", cfg.refine_to, "checks");
    const std::string source = read<std::string>(c, "flux_source", "random", "checks");
    if (source != "random" && source != "mode_zero") {
      throw InputError("checks.flux_source must be 'random' or 'mode_zero'" + where(c["flux_source"]));
    }
    cfg.flux_random = source == "random";
    cfg.flux_component = read<int>(c, "flux_component", cfg.flux_component, "checks");
    cfg.scaled_probes = read<bool>(c, "scaled_probes", cfg.scaled_probes, "checks");
    cfg.equivalence_eta = read<double>(c, "equivalence_eta", cfg.equivalence_eta, "checks");
    cfg.equivalence_sources = read<int>(c, "equivalence_sources", cfg.equivalence_sources, "checks");
  }
  if (cfg.equivalence_sources < 1 || !(cfg.equivalence_eta > 0.0)) {
    throw InputError("equivalence checks need positive eta and source count");
  }

  if (const YAML::Node a = root["abstract"]) {
    reject_unknown(a, {"families", "fibres", "dim", "c", "gap"}, "abstract");
    auto& s = cfg.abstract;
    s.families = read<int>(a, "families", s.families, "abstract");
    s.fibres = read<int>(a, "fibres", s.fibres, "abstract");
    if (const YAML::Node dim = a["dim"]) {
      if (!dim.IsSequence() || dim.size() != 2) throw InputError("abstract.dim must be [lo, hi]" + where(dim));
      s.dim_min = dim[0].as<int>();
      s.dim_max = dim[1].as<int>();
    }
    read_range(a, "c", s.c_min, s.c_max);
    read_range(a, "gap", s.gap_min, s.gap_max);
    if (s.families < 1 || s.fibres < 1 || s.dim_min < 1 || s.dim_max < s.dim_min) {
      throw InputError("abstract section has non-positive counts or an empty dimension range");
    }
  }

  if (const YAML::Node o = root["output"]) {
    fs::path p = o.as<std::string>();
    cfg.out_dir = p.is_relative() ? (base_dir / p).lexically_normal() : p;
  }
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

std::string content_digest(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_digest(const RunConfig& cfg) {
  std::string canon;
  append_field(canon, "problem", to_string(cfg.kind));
  append_field(canon, "d", std::to_string(cfg.d));
  append_field(canon, "n", std::to_string(cfg.n));
  append_field(canon, "n_trunc", std::to_string(cfg.n_trunc));
  append_field(canon, "seed", std::to_string(cfg.seed));
  std::string grid;
  for (int p : cfg.theta_points) grid += std::to_string(p) + ",";
  append_field(canon, "theta_grid", grid);
  append_field(canon, "eps", hex(cfg.eps.start) + "," + hex(cfg.eps.stop) + "," + std::to_string(cfg.eps.count));
  append_field(canon, "tols",
               hex(cfg.tols.sym) + "," + hex(cfg.tols.orth) + "," + hex(cfg.tols.num) + "," + hex(cfg.tol_trunc));
  append_field(canon, "checks",
               std::to_string(cfg.doubling_check) + "," + std::to_string(cfg.refine_to) + "," +
                   std::to_string(cfg.flux_random) + "," + std::to_string(cfg.flux_component) + "," +
                   std::to_string(cfg.scaled_probes) + "," + hex(cfg.equivalence_eta) + "," +
                   std::to_string(cfg.equivalence_sources));
  const auto& a = cfg.abstract;
  append_field(canon, "abstract",
               std::to_string(a.families) + "," + std::to_string(a.fibres) + "," + std::to_string(a.dim_min) + "," +
                   std::to_string(a.dim_max) + "," + hex(a.c_min) + "," + hex(a.c_max) + "," + hex(a.gap_min) +
                   "," + hex(a.gap_max));
  for (const auto& [name, path] : cfg.coefficients) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    append_field(canon, "coefficient." + name, content_digest(ss.str()));
  }
  return content_digest(canon);
}

}  // namespace fibrehom::io
