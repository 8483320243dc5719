#include "fibrehom/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace fibrehom::fourier {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
const Complex kI(0.0, 1.0);

int dense_key(const LatticePoint& z, int d, int n_trunc) {
  const int side = 2 * n_trunc + 1;
  int key = 0;
  for (int j = d - 1; j >= 0; --j) {
    const int c = z[static_cast<std::size_t>(j)];
    if (c < -n_trunc || c > n_trunc) return -1;
    key = key * side + (c + n_trunc);
  }
  return key;
}

void require_theta(const ModeSet& ms, const Theta& theta) {
  if (theta.dim() != ms.dim()) throw InputError("theta dimension does not match the mode set");
}

void require_3d(const ModeSet& ms, const char* what) {
  if (ms.dim() != 3) throw InputError(std::string(what) + " requires d = 3");
  if (ms.components() != 3) throw InputError(std::string(what) + " requires n = 3 field components");
}

double sq_norm(const std::array<double, 3>& k) { return k[0] * k[0] + k[1] * k[1] + k[2] * k[2]; }

CMatrix projection_impl(const ModeSet& ms, int n, const Theta& theta, const ModeBlock& block) {
  require_theta(ms, theta);
  const int d = ms.dim();
  const Index width = static_cast<Index>(n) * d;
  CMatrix p = CMatrix::Zero(static_cast<Index>(block.size()) * width, static_cast<Index>(block.size()) * width);
  for (std::size_t b = 0; b < block.size(); ++b) {
    const Index off = static_cast<Index>(b) * width;
    if (block[b] == 0) {
      p.block(off, off, width, width).setIdentity();
      continue;
    }
    const auto k = wave_vector(theta, ms.mode(block[b]));
    const double kk = sq_norm(k);
    for (int r = 0; r < n; ++r) {
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
          p(off + r * d + i, off + r * d + j) = k[static_cast<std::size_t>(i)] * k[static_cast<std::size_t>(j)] / kk;
        }
      }
    }
  }
  return p;
}

CMatrix basis_impl(const ModeSet& ms, int n, const Theta& theta, const ModeBlock& block) {
  require_theta(ms, theta);
  const int d = ms.dim();
  const Index width = static_cast<Index>(n) * d;
  const bool has_zero = !block.empty() && block.front() == 0;
  const Index cols = (has_zero ? width : 0) + static_cast<Index>(block.size() - (has_zero ? 1 : 0)) * n;
  CMatrix basis = CMatrix::Zero(static_cast<Index>(block.size()) * width, cols);
  Index col = 0;
  for (std::size_t b = 0; b < block.size(); ++b) {
    const Index off = static_cast<Index>(b) * width;
    if (block[b] == 0) {
      for (Index q = 0; q < width; ++q) basis(off + q, col++) = 1.0;
      continue;
    }
    const auto k = wave_vector(theta, ms.mode(block[b]));
    const double kn = std::sqrt(sq_norm(k));
    for (int r = 0; r < n; ++r) {
      for (int j = 0; j < d; ++j) basis(off + r * d + j, col) = k[static_cast<std::size_t>(j)] / kn;
      ++col;
    }
  }
  return basis;
}

}  // namespace

ModeSet::ModeSet(int d, int n, int n_trunc) : d_(d), n_(n), n_trunc_(n_trunc) {
  if (d < 1 || d > 3) throw InputError("spatial dimension must be 1, 2 or 3");
  if (n < 1) throw InputError("component count must be positive");
  if (n_trunc < 0) throw InputError("truncation order must be non-negative");
  const int side = 2 * n_trunc + 1;
  std::size_t total = 1;
  for (int j = 0; j < d; ++j) total *= static_cast<std::size_t>(side);
  std::vector<LatticePoint> rest;
  rest.reserve(total);
  LatticePoint z{0, 0, 0};
  for (int j = 0; j < d; ++j) z[static_cast<std::size_t>(j)] = -n_trunc;
  // odometer over the last coordinate fastest, which is lexicographic order
  for (std::size_t count = 0; count < total; ++count) {
    if (z != LatticePoint{0, 0, 0}) rest.push_back(z);
    for (int j = d - 1; j >= 0; --j) {
      auto& c = z[static_cast<std::size_t>(j)];
      if (c < n_trunc) {
        ++c;
        break;
      }
      c = -n_trunc;
    }
  }
  modes_.reserve(total);
  modes_.push_back({0, 0, 0});
  modes_.insert(modes_.end(), rest.begin(), rest.end());
  lookup_.assign(total, -1);
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    lookup_[static_cast<std::size_t>(dense_key(modes_[i], d_, n_trunc_))] = static_cast<int>(i);
  }
}

std::optional<std::size_t> ModeSet::index_of(const LatticePoint& z) const {
  for (int j = d_; j < 3; ++j) {
    if (z[static_cast<std::size_t>(j)] != 0) return std::nullopt;
  }
  const int key = dense_key(z, d_, n_trunc_);
  if (key < 0) return std::nullopt;
  return static_cast<std::size_t>(lookup_[static_cast<std::size_t>(key)]);
}

Theta::Theta(std::vector<double> components) : v_(std::move(components)) {
  if (v_.empty() || v_.size() > 3) throw InputError("theta must have 1 to 3 components");
  for (double t : v_) {
    if (!(t >= -kPi && t < kPi)) throw InputError("theta component " + std::to_string(t) + " outside [-pi, pi)");
  }
}

double Theta::norm() const {
  double s = 0;
  for (double t : v_) s += t * t;
  return std::sqrt(s);
}

std::vector<double> theta_axis(int points) {
  if (points < 1) throw InputError("theta grid needs at least one point per axis");
  if (points == 1) return {0.0};
  const int half = (points + 1) / 2;
  std::vector<double> out;
  for (int j = 0; j < points; ++j) out.push_back(j == half ? 0.0 : -kPi + j * kPi / half);
  return out;
}

std::vector<Theta> theta_grid(std::span<const int> points_per_axis) {
  const int d = static_cast<int>(points_per_axis.size());
  if (d < 1 || d > 3) throw InputError("theta grid dimension must be 1, 2 or 3");
  std::vector<std::vector<double>> axes;
  for (int p : points_per_axis) axes.push_back(theta_axis(p));
  std::vector<Theta> grid;
  std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
  for (;;) {
    std::vector<double> t;
    for (int j = 0; j < d; ++j) t.push_back(axes[static_cast<std::size_t>(j)][idx[static_cast<std::size_t>(j)]]);
    grid.emplace_back(std::move(t));
    int j = d - 1;
    for (; j >= 0; --j) {
      auto& i = idx[static_cast<std::size_t>(j)];
      if (++i < axes[static_cast<std::size_t>(j)].size()) break;
      i = 0;
    }
    if (j < 0) break;
  }
  return grid;
}

std::array<double, 3> wave_vector(const Theta& theta, const LatticePoint& z) {
  std::array<double, 3> k{0.0, 0.0, 0.0};
  for (int j = 0; j < theta.dim(); ++j) {
    k[static_cast<std::size_t>(j)] = theta[j] + kTwoPi * z[static_cast<std::size_t>(j)];
  }
  return k;
}

ModeBlock all_modes(const ModeSet& ms) {
  ModeBlock b(ms.size());
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = i;
  return b;
}

CVector QuasiPeriodicField::evaluate(const Theta& theta, std::span<const double> y) const {
  if (static_cast<int>(y.size()) != modes.dim()) throw InputError("evaluation point has the wrong dimension");
  CVector out = CVector::Zero(components);
  for (std::size_t m = 0; m < modes.size(); ++m) {
    const auto k = wave_vector(theta, modes.mode(m));
    double phase = 0;
    for (std::size_t j = 0; j < y.size(); ++j) phase += k[j] * y[j];
    const Complex e = std::exp(kI * phase);
    for (int c = 0; c < components; ++c) out(c) += coefficient(m, c) * e;
  }
  return out;
}

CMatrix grad_theta_matrix(const ModeSet& ms, const Theta& theta) {
  return grad_theta_matrix(ms, theta, all_modes(ms));
}

CMatrix grad_theta_matrix(const ModeSet& ms, const Theta& theta, const ModeBlock& block) {
  require_theta(ms, theta);
  const int n = ms.components(), d = ms.dim();
  const Index nb = static_cast<Index>(block.size());
  CMatrix g = CMatrix::Zero(nb * n * d, nb * n);
  for (Index b = 0; b < nb; ++b) {
    const auto k = wave_vector(theta, ms.mode(block[static_cast<std::size_t>(b)]));
    for (int r = 0; r < n; ++r) {
      for (int j = 0; j < d; ++j) g(b * n * d + r * d + j, b * n + r) = kI * k[static_cast<std::size_t>(j)];
    }
  }
  return g;
}

CMatrix div_theta_matrix(const ModeSet& ms, const Theta& theta) {
  return div_theta_matrix(ms, theta, all_modes(ms));
}

CMatrix div_theta_matrix(const ModeSet& ms, const Theta& theta, const ModeBlock& block) {
  require_theta(ms, theta);
  const int n = ms.components(), d = ms.dim();
  const Index nb = static_cast<Index>(block.size());
  CMatrix dv = CMatrix::Zero(nb * n, nb * n * d);
  for (Index b = 0; b < nb; ++b) {
    const auto k = wave_vector(theta, ms.mode(block[static_cast<std::size_t>(b)]));
    for (int r = 0; r < n; ++r) {
      for (int j = 0; j < d; ++j) dv(b * n + r, b * n * d + r * d + j) = kI * k[static_cast<std::size_t>(j)];
    }
  }
  return dv;
}

CMatrix curl_theta_matrix(const ModeSet& ms, const Theta& theta) {
  return curl_theta_matrix(ms, theta, all_modes(ms));
}

CMatrix curl_theta_matrix(const ModeSet& ms, const Theta& theta, const ModeBlock& block) {
  require_3d(ms, "curl_theta_matrix");
  require_theta(ms, theta);
  const Index nb = static_cast<Index>(block.size());
  CMatrix c = CMatrix::Zero(nb * 3, nb * 3);
  for (Index b = 0; b < nb; ++b) {
    const auto k = wave_vector(theta, ms.mode(block[static_cast<std::size_t>(b)]));
    const Index o = b * 3;
    // (k x u)_0 = k1 u2 - k2 u1, etc.
    c(o + 0, o + 1) = -kI * k[2];
    c(o + 0, o + 2) = kI * k[1];
    c(o + 1, o + 0) = kI * k[2];
    c(o + 1, o + 2) = -kI * k[0];
    c(o + 2, o + 0) = -kI * k[1];
    c(o + 2, o + 1) = kI * k[0];
  }
  return c;
}

CMatrix projection_P_theta(const ModeSet& ms, const Theta& theta) {
  return projection_P_theta(ms, theta, all_modes(ms));
}

CMatrix projection_P_theta(const ModeSet& ms, const Theta& theta, const ModeBlock& block) {
  return projection_impl(ms, ms.components(), theta, block);
}

CMatrix p_theta_basis(const ModeSet& ms, const Theta& theta, const ModeBlock& block) {
  return basis_impl(ms, ms.components(), theta, block);
}

CMatrix projection_n_theta(const ModeSet& ms, const Theta& theta) {
  return projection_n_theta(ms, theta, all_modes(ms));
}

CMatrix projection_n_theta(const ModeSet& ms, const Theta& theta, const ModeBlock& block) {
  require_3d(ms, "projection_n_theta");
  return projection_impl(ms, 1, theta, block);
}

CMatrix n_theta_basis(const ModeSet& ms, const Theta& theta, const ModeBlock& block) {
  require_3d(ms, "n_theta_basis");
  return basis_impl(ms, 1, theta, block);
}

}  // namespace fibrehom::fourier
