#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fibrehom/io.hpp"

namespace fibrehom::io {

namespace fs = std::filesystem;

void write_atomic(const fs::path& path, std::string_view bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string sweep_csv(const SweepResult& result, int theta_dim) {
  std::string out;
  for (int j = 1; j <= theta_dim; ++j) out += "theta_" + std::to_string(j) + ",";
  out += "eps,err_opnorm,bound,verdict,c,M_norm,C_R,kappa,n_trunc,cond_max\n";
  for (const auto& r : result.rows) {
    for (int j = 0; j < theta_dim; ++j) {
      const double t = j < static_cast<int>(r.theta.size()) ? r.theta[static_cast<std::size_t>(j)] : 0.0;
      out += format_double(t) + ",";
    }
    out += format_double(r.eps) + "," + format_double(r.err) + "," + format_double(r.bound) + "," +
           to_string(r.verdict) + "," + format_double(r.c) + "," + format_double(r.m_norm) + "," +
           format_double(r.c_r) + "," + format_double(r.kappa) + "," + std::to_string(r.n_trunc) + "," +
           format_double(r.cond_max) + "\n";
  }
  return out;
}

AhomCache::AhomCache(fs::path dir, std::string coefficient_digest)
    : dir_(std::move(dir)), digest_(std::move(coefficient_digest)) {}

fs::path AhomCache::path_for(const fourier::ModeSet& ms, const fourier::Theta& theta) const {
  std::string key = digest_ + "|" + std::to_string(ms.dim()) + "|" + std::to_string(ms.components()) + "|" +
                    std::to_string(ms.n_trunc());
  for (double t : theta.values()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "|%a", t);
    key += buf;
  }
  return dir_ / ("ahom-" + content_digest(key) + ".txt");
}

CMatrix AhomCache::get(const fourier::CoefficientField& a, const fourier::ModeSet& ms, const fourier::Theta& theta) {
  const fs::path path = path_for(ms, theta);
  const Index width = static_cast<Index>(ms.components()) * ms.dim();
  if (std::ifstream in{path}) {
    std::string header;
    std::getline(in, header);
    CMatrix out(width, width);
    bool ok = true;
    for (Index i = 0; i < width && ok; ++i) {
      for (Index j = 0; j < width && ok; ++j) {
        std::string re, im;
        ok = static_cast<bool>(in >> re >> im);
        if (ok) out(i, j) = Complex(std::strtod(re.c_str(), nullptr), std::strtod(im.c_str(), nullptr));
      }
    }
    if (ok) {
      ++hits_;
      return out;
    }
  }
  ++misses_;
  const CMatrix value = cell::assemble_ahom(a, ms, theta).entries;
  std::string body = "ahom " + std::to_string(width) + "\n";
  for (Index i = 0; i < width; ++i) {
    for (Index j = 0; j < width; ++j) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "%a %a\n", value(i, j).real(), value(i, j).imag());
      body += buf;
    }
  }
  write_atomic(path, body);
  return value;
}

cell::AhomProvider AhomCache::provider(const fourier::CoefficientField& a, const fourier::ModeSet& ms) {
  return [this, a, ms](const fourier::Theta& theta) { return get(a, ms, theta); };
}

}  // namespace fibrehom::io
