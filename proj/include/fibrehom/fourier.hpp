#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fibrehom/types.hpp"

namespace fibrehom::fourier {

/// Integer lattice point; entries past the spatial dimension are zero.
using LatticePoint = std::array<int, 3>;

/// Modes z with |z|_inf <= n_trunc. Index 0 is z = 0; the remaining modes
/// follow in lexicographic order of (z_1, ..., z_d).
class ModeSet {
 public:
  ModeSet(int d, int n, int n_trunc);

  int dim() const { return d_; }
  int components() const { return n_; }
  int n_trunc() const { return n_trunc_; }
  std::size_t size() const { return modes_.size(); }
  const LatticePoint& mode(std::size_t i) const { return modes_[i]; }
  const std::vector<LatticePoint>& modes() const { return modes_; }
  std::optional<std::size_t> index_of(const LatticePoint& z) const;

  Index scalar_size() const { return static_cast<Index>(size()) * n_; }
  Index tensor_size() const { return static_cast<Index>(size()) * n_ * d_; }

  /// Same lattice with a different component count.
  ModeSet with_components(int n) const { return ModeSet(d_, n, n_trunc_); }

 private:
  int d_, n_, n_trunc_;
  std::vector<LatticePoint> modes_;
  std::vector<int> lookup_;  // dense (2N+1)^d table -> position in modes_
};

/// Quasi-momentum in [-pi, pi)^d.
class Theta {
 public:
  explicit Theta(std::vector<double> components);
  static Theta zero(int d) { return Theta(std::vector<double>(static_cast<std::size_t>(d), 0.0)); }

  int dim() const { return static_cast<int>(v_.size()); }
  const std::vector<double>& values() const { return v_; }
  double operator[](int j) const { return v_[static_cast<std::size_t>(j)]; }
  double norm() const;

 private:
  std::vector<double> v_;
};

/// Per axis: 1 point gives {0}; m >= 2 points are -pi + j*pi/ceil(m/2),
/// j = 0..m-1, so both the corner -pi and 0 are on the lattice.
std::vector<double> theta_axis(int points);
/// Tensor grid, lexicographic in (theta_1, ..., theta_d).
std::vector<Theta> theta_grid(std::span<const int> points_per_axis);

/// Wave vector theta + 2 pi z.
std::array<double, 3> wave_vector(const Theta& theta, const LatticePoint& z);

/// Subset of mode indices (ascending). Operators below act on fields
/// restricted to such a subset; layout is position-in-block * components
/// + component.
using ModeBlock = std::vector<std::size_t>;
ModeBlock all_modes(const ModeSet& ms);

/// Coefficient array of a theta-quasi-periodic field over a mode set.
struct QuasiPeriodicField {
  ModeSet modes;
  int components;
  CVector coeffs;  // size modes.size() * components

  Complex coefficient(std::size_t mode, int component) const {
    return coeffs(static_cast<Index>(mode) * components + component);
  }
  /// Pointwise value sum_z c^(z) e^{i (theta + 2 pi z) . y}.
  CVector evaluate(const Theta& theta, std::span<const double> y) const;
  /// L2 norm over the unit cell (= Euclidean norm of coeffs).
  double l2_norm() const { return coeffs.norm(); }
};

/// n-component fields -> (n x d)-component fields, c (x) i(theta + 2 pi z).
CMatrix grad_theta_matrix(const ModeSet& ms, const Theta& theta);
CMatrix grad_theta_matrix(const ModeSet& ms, const Theta& theta, const ModeBlock& block);

/// (n x d)-component fields -> n-component fields, X i(theta + 2 pi z).
CMatrix div_theta_matrix(const ModeSet& ms, const Theta& theta);
CMatrix div_theta_matrix(const ModeSet& ms, const Theta& theta, const ModeBlock& block);

/// i(theta + 2 pi z) x on 3-component fields. Requires d = 3, n = 3.
CMatrix curl_theta_matrix(const ModeSet& ms, const Theta& theta);
CMatrix curl_theta_matrix(const ModeSet& ms, const Theta& theta, const ModeBlock& block);

/// Orthogonal projector onto P(theta): everything at mode 0, and at z != 0
/// the fields whose rows are parallel to theta + 2 pi z.
CMatrix projection_P_theta(const ModeSet& ms, const Theta& theta);
CMatrix projection_P_theta(const ModeSet& ms, const Theta& theta, const ModeBlock& block);

/// Orthonormal basis of P(theta) within the block. Mode-0 columns come
/// first (unit vectors, row-major r*d + j), then e_r (x) k/|k| per mode.
CMatrix p_theta_basis(const ModeSet& ms, const Theta& theta, const ModeBlock& block);

/// Projector onto n(theta) = constants at mode 0 plus gradients. Requires
/// d = 3, n = 3.
CMatrix projection_n_theta(const ModeSet& ms, const Theta& theta);
CMatrix projection_n_theta(const ModeSet& ms, const Theta& theta, const ModeBlock& block);
CMatrix n_theta_basis(const ModeSet& ms, const Theta& theta, const ModeBlock& block);

}  // namespace fibrehom::fourier
