#include "fibrehom/coefficient.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "fibrehom/linalg.hpp"
#include "fibrehom/random.hpp"

namespace fibrehom::fourier {

namespace {

std::string point_str(const LatticePoint& w, int d) {
  std::string s = "(";
  for (int j = 0; j < d; ++j) {
    if (j) s += ",";
    s += std::to_string(w[static_cast<std::size_t>(j)]);
  }
  return s + ")";
}

LatticePoint negate(const LatticePoint& w) { return {-w[0], -w[1], -w[2]}; }

void require_shapes(const CoefficientField& coef) {
  if (coef.d < 1 || coef.d > 3) throw InputError("coefficient dimension must be 1, 2 or 3");
  if (coef.rows < 1 || coef.rows != coef.cols) throw InputError("coefficient blocks must be square");
  for (const auto& [w, block] : coef.modes) {
    for (int j = coef.d; j < 3; ++j) {
      if (w[static_cast<std::size_t>(j)] != 0) throw InputError("mode " + point_str(w, 3) + " exceeds dimension");
    }
    if (block.rows() != coef.rows || block.cols() != coef.cols) {
      throw InputError("mode " + point_str(w, coef.d) + " has a block of the wrong shape");
    }
  }
}

}  // namespace

int CoefficientField::bandwidth() const {
  int bw = 0;
  for (const auto& [w, block] : modes) {
    for (int c : w) bw = std::max(bw, std::abs(c));
  }
  return bw;
}

bool CoefficientField::is_constant() const {
  for (const auto& [w, block] : modes) {
    if (w != LatticePoint{0, 0, 0} && max_abs(block) != 0.0) return false;
  }
  return true;
}

CMatrix CoefficientField::mode(const LatticePoint& w) const {
  const auto it = modes.find(w);
  if (it == modes.end()) return CMatrix::Zero(rows, cols);
  return it->second;
}

CMatrix CoefficientField::evaluate(std::span<const double> y) const {
  CMatrix out = CMatrix::Zero(rows, cols);
  for (const auto& [w, block] : modes) {
    double phase = 0;
    for (int j = 0; j < d; ++j) phase += w[static_cast<std::size_t>(j)] * y[static_cast<std::size_t>(j)];
    out += block * std::exp(Complex(0.0, 2.0 * std::numbers::pi * phase));
  }
  return out;
}

CoercivityReport validate_coefficient(const CoefficientField& coef, double tol) {
  require_shapes(coef);
  if (!(coef.declared_nu > 0.0)) throw InputError("declared coercivity constant must be positive");
  if (coef.real_valued) {
    for (const auto& [w, block] : coef.modes) {
      const CMatrix partner = coef.mode(negate(w));
      const double gap = max_abs(partner - block.conjugate());
      if (gap > 1e-12 * std::max(1.0, max_abs(block))) {
        throw InputError("real-valued coefficient violates conjugate symmetry at mode " + point_str(w, coef.d));
      }
    }
  }
  const int per_axis = 4 * coef.bandwidth() + 4;
  int total = 1;
  for (int j = 0; j < coef.d; ++j) total *= per_axis;
  CoercivityReport rep;
  rep.measured_nu = std::numeric_limits<double>::infinity();
  std::vector<double> y(static_cast<std::size_t>(coef.d));
  for (int p = 0; p < total; ++p) {
    int rest = p;
    for (int j = 0; j < coef.d; ++j) {
      y[static_cast<std::size_t>(j)] = static_cast<double>(rest % per_axis) / per_axis;
      rest /= per_axis;
    }
    const CMatrix value = coef.evaluate(y);
    const double lo = min_real_part(value);
    rep.sampled_sup_norm = std::max(rep.sampled_sup_norm, op_norm(value));
    if (lo < rep.measured_nu) {
      rep.measured_nu = lo;
      rep.worst_point = y;
    }
  }
  if (rep.measured_nu < coef.declared_nu - tol) {
    std::string where = "(";
    for (std::size_t j = 0; j < rep.worst_point.size(); ++j) {
      if (j) where += ", ";
      where += std::to_string(rep.worst_point[j]);
    }
    throw CoercivityError("coefficient real part drops to " + std::to_string(rep.measured_nu) + " at y = " +
                              where + "), below declared nu " + std::to_string(coef.declared_nu),
                          rep.measured_nu);
  }
  return rep;
}

CoefficientField constant_coefficient(int d, const CMatrix& value, double nu) {
  CoefficientField c;
  c.d = d;
  c.rows = static_cast<int>(value.rows());
  c.cols = static_cast<int>(value.cols());
  c.modes[{0, 0, 0}] = value;
  c.declared_nu = nu;
  c.real_valued = max_abs(value.imag()) == 0.0;
  return c;
}

CoefficientField random_coefficient(std::uint64_t seed, int d, int size, int bandwidth, double nu,
                                    bool real_valued) {
  if (d < 1 || d > 3 || size < 1 || bandwidth < 0 || !(nu > 0.0)) {
    throw InputError("random_coefficient: bad parameters");
  }
  Rng rng(seed);
  CoefficientField c;
  c.d = d;
  c.rows = c.cols = size;
  c.declared_nu = nu;
  c.real_valued = real_valued;
  const ModeSet lattice(d, 1, bandwidth);
  const double amp = 0.5 / std::max<std::size_t>(1, lattice.size() - 1);
  double total = 0.0;
  for (std::size_t i = 1; i < lattice.size(); ++i) {
    const LatticePoint w = lattice.mode(i);
    if (c.modes.count(w)) continue;
    CMatrix b = rng.gaussian(size, size) * amp;
    if (real_valued) {
      c.modes[w] = b;
      c.modes[negate(w)] = b.conjugate();
      total += 2.0 * op_norm(b);
    } else {
      c.modes[w] = b;
      total += op_norm(b);
    }
  }
  CMatrix g = rng.gaussian(size, size) * 0.5;
  if (real_valued) g = g.real().cast<Complex>();
  c.modes[{0, 0, 0}] = (nu + total) * CMatrix::Identity(size, size) + 0.5 * (g - g.adjoint());
  return c;
}

std::vector<LatticePoint> support(const CoefficientField& coef) {
  std::vector<LatticePoint> out;
  for (const auto& [w, block] : coef.modes) {
    if (max_abs(block) != 0.0) out.push_back(w);
  }
  return out;
}

CMatrix multiplication_matrix(const CoefficientField& coef, const ModeSet& ms) {
  return multiplication_matrix(coef, ms, all_modes(ms));
}

CMatrix multiplication_matrix(const CoefficientField& coef, const ModeSet& ms, const ModeBlock& block) {
  require_shapes(coef);
  if (coef.d != ms.dim()) throw InputError("coefficient and mode set dimensions differ");
  const int width = coef.rows;
  if (width != ms.components() && width != ms.components() * ms.dim()) {
    throw InputError("coefficient block size " + std::to_string(width) + " matches neither field shape");
  }
  std::vector<int> position(ms.size(), -1);
  for (std::size_t b = 0; b < block.size(); ++b) position[block[b]] = static_cast<int>(b);
  const Index nb = static_cast<Index>(block.size());
  CMatrix out = CMatrix::Zero(nb * width, nb * width);
  for (const auto& [w, a] : coef.modes) {
    for (std::size_t col = 0; col < block.size(); ++col) {
      const LatticePoint& src = ms.mode(block[col]);
      const LatticePoint dst{src[0] + w[0], src[1] + w[1], src[2] + w[2]};
      const auto idx = ms.index_of(dst);
      if (!idx || position[*idx] < 0) continue;
      out.block(position[*idx] * width, static_cast<Index>(col) * width, width, width) += a;
    }
  }
  return out;
}

CMatrix divergence_form_matrix(const CoefficientField& coef, const ModeSet& ms, const Theta& theta,
                               const ModeBlock& block) {
  require_shapes(coef);
  if (coef.d != ms.dim()) throw InputError("coefficient and mode set dimensions differ");
  const int n = ms.components();
  const int d = ms.dim();
  if (coef.rows != n * d) throw InputError("divergence form needs a coefficient on n x d tensors");
  std::vector<int> position(ms.size(), -1);
  for (std::size_t b = 0; b < block.size(); ++b) position[block[b]] = static_cast<int>(b);
  std::vector<std::array<double, 3>> k(block.size());
  for (std::size_t b = 0; b < block.size(); ++b) k[b] = wave_vector(theta, ms.mode(block[b]));
  const Index nb = static_cast<Index>(block.size());
  CMatrix out = CMatrix::Zero(nb * n, nb * n);
  for (const auto& [w, a] : coef.modes) {
    for (std::size_t col = 0; col < block.size(); ++col) {
      const LatticePoint& src = ms.mode(block[col]);
      const auto idx = ms.index_of({src[0] + w[0], src[1] + w[1], src[2] + w[2]});
      if (!idx || position[*idx] < 0) continue;
      const auto row = static_cast<std::size_t>(position[*idx]);
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
          Complex sum = 0.0;
          for (int j = 0; j < d; ++j) {
            for (int l = 0; l < d; ++l) sum += k[row][j] * a(r * d + j, c * d + l) * k[col][l];
          }
          out(static_cast<Index>(row) * n + r, static_cast<Index>(col) * n + c) += sum;
        }
      }
    }
  }
  return out;
}

std::vector<ModeBlock> coupled_mode_blocks(const ModeSet& ms, std::span<const CoefficientField* const> coefs) {
  std::vector<std::size_t> parent(ms.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const CoefficientField* coef : coefs) {
    for (const LatticePoint& w : support(*coef)) {
      if (w == LatticePoint{0, 0, 0}) continue;
      for (std::size_t i = 0; i < ms.size(); ++i) {
        const LatticePoint& z = ms.mode(i);
        const auto j = ms.index_of({z[0] + w[0], z[1] + w[1], z[2] + w[2]});
        if (!j) continue;
        const std::size_t a = find(i), b = find(*j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  std::vector<ModeBlock> blocks;
  std::vector<int> slot(ms.size(), -1);
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const std::size_t root = find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<int>(blocks.size());
      blocks.emplace_back();
    }
    blocks[static_cast<std::size_t>(slot[root])].push_back(i);
  }
  return blocks;
}

}  // namespace fibrehom::fourier
