#include <gtest/gtest.h>

#include <cmath>

#include "fibrehom/cell.hpp"
#include "fibrehom/linalg.hpp"
#include "fibrehom/random.hpp"
#include "oracles.hpp"

using namespace fibrehom;
using namespace fibrehom::cell;
using fourier::LatticePoint;

namespace {

CoefficientField laminate() {
  CoefficientField a;
  a.d = 1;
  a.modes[{0, 0, 0}] = CMatrix::Constant(1, 1, 2.0);
  a.modes[{1, 0, 0}] = CMatrix::Constant(1, 1, 0.5);
  a.modes[{-1, 0, 0}] = CMatrix::Constant(1, 1, 0.5);
  a.declared_nu = 1.0;
  a.real_valued = true;
  return a;
}

// a_11 varies along y_2 and a_22 along y_1, so both are arithmetic means at theta = 0.
CoefficientField crossed_laminate() {
  CoefficientField a;
  a.d = 2;
  a.rows = a.cols = 2;
  auto entry = [](int r, double v) {
    CMatrix m = CMatrix::Zero(2, 2);
    m(r, r) = v;
    return m;
  };
  CMatrix base = CMatrix::Zero(2, 2);
  base(0, 0) = 1.375;
  base(1, 1) = 1.75;
  a.modes[{0, 0, 0}] = base;
  for (int sgn : {1, -1}) {
    a.modes[{0, sgn, 0}] = entry(0, -0.25);
    a.modes[{0, 2 * sgn, 0}] = entry(0, 0.0625);
    a.modes[{sgn, 0, 0}] = entry(1, -0.5);
    a.modes[{2 * sgn, 0, 0}] = entry(1, 0.125);
  }
  a.declared_nu = 0.75;
  a.real_valued = true;
  return a;
}

}  // namespace

TEST(Cell, ConstantTensorIsItsOwnHomogenisation) {
  Rng rng(3);
  const CMatrix value = CMatrix::Identity(4, 4) * 2.0 + 0.3 * rng.gaussian(4, 4);
  const auto a = fourier::constant_coefficient(2, value, 1.0);
  const ModeSet ms(2, 2, 2);
  for (const Theta& t : {Theta({0.0, 0.0}), Theta({1.1, -2.5})}) {
    EXPECT_LT(oracle::rel(assemble_ahom(a, ms, t).entries, value), 1e-14);
    const auto corr = solve_cell(a, ms, t, 1, 0);
    EXPECT_EQ(corr.coeffs.l2_norm(), 0.0);
  }
}

TEST(Cell, LaminateMatchesHarmonicMean) {
  const auto a = laminate();
  const ModeSet ms(1, 1, 16);
  const double oracle_value = oracle::harmonic_mean([](double y) { return 2.0 + std::cos(2.0 * std::numbers::pi * y); });
  EXPECT_NEAR(oracle_value, std::sqrt(3.0), 1e-14);
  for (double t : {0.0, 0.7, -3.0}) {
    const auto h = assemble_ahom(a, ms, Theta({t}));
    EXPECT_NEAR(h.entries(0, 0).real(), oracle_value, 1e-13);
    EXPECT_NEAR(h.entries(0, 0).imag(), 0.0, 1e-13);
  }
}

TEST(Cell, CorrectorAndRouteAgreement) {
  const ModeSet ms(2, 2, 2);
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto a = fourier::random_coefficient(seed, 2, 4, 1, 0.5, seed % 2 == 0);
    Rng rng(seed + 40);
    const Theta theta({rng.uniform(-3.1, 3.1), rng.uniform(-3.1, 3.1)});
    const auto h = assemble_ahom(a, ms, theta);
    const CMatrix inv = ahom_inverse_via_projection(a, ms, theta);
    EXPECT_LT(oracle::rel(inv * h.entries, CMatrix::Identity(4, 4)), 1e-10);
    EXPECT_LT(h.sesquilinear_gap, 1e-12);
    EXPECT_FALSE(h.ill_conditioned);
    const auto corr = solve_cell(a, ms, theta, 1, 1);
    EXPECT_LT(corr.residual_norm, 1e-12);
    EXPECT_EQ(corr.coeffs.coefficient(0, 0), Complex(0.0));
    const auto b = check_tensor_bounds(h, a, ms);
    EXPECT_TRUE(b.pass()) << b.min_re_eig << " " << b.re_norm << " " << b.norm;
  }
}

TEST(Cell, CrossedLaminateAtZeroAndOffZero) {
  const auto a = crossed_laminate();
  const ModeSet ms(2, 1, 8);
  const auto h0 = assemble_ahom(a, ms, Theta({0.0, 0.0}));
  CMatrix expected = CMatrix::Zero(2, 2);
  expected(0, 0) = 1.375;
  expected(1, 1) = 1.75;
  EXPECT_LT((h0.entries - expected).norm(), 1e-12);
  const auto h1 = assemble_ahom(a, ms, Theta({std::numbers::pi / 2, 0.0}));
  EXPECT_GT(op_norm(h1.entries - h0.entries), 1e-3);
  EXPECT_LT(oracle::rel(ahom_inverse_via_projection(a, ms, h1.theta) * h1.entries, CMatrix::Identity(2, 2)), 1e-10);
}

TEST(Cell, RejectsBadShapes) {
  const auto a = laminate();
  EXPECT_THROW(assemble_ahom(a, ModeSet(1, 1, 0), Theta({0.0})), InputError);
  EXPECT_THROW(assemble_ahom(a, ModeSet(1, 2, 4), Theta({0.0})), InputError);
  EXPECT_THROW(solve_cell(a, ModeSet(1, 1, 4), Theta({0.0}), 0, 1), InputError);
}

TEST(Lipschitz, LaminateIsFlatCrossedIsNot) {
  const ModeSet ms1(1, 1, 12);
  const auto grid1 = fourier::theta_grid(std::vector<int>{7});
  const auto flat = lipschitz_sweep(laminate(), ms1, grid1);
  EXPECT_EQ(flat.rows.size(), 7u);
  for (const auto& r : flat.rows) EXPECT_LT(r.err, 1e-12);
  ASSERT_NE(flat.find_check("ratio_bounded"), nullptr);
  EXPECT_TRUE(flat.find_check("ratio_bounded")->pass);

  const ModeSet ms2(2, 1, 6);
  const auto grid2 = fourier::theta_grid(std::vector<int>{5, 5});
  const auto bumpy = lipschitz_sweep(crossed_laminate(), ms2, grid2);
  EXPECT_TRUE(bumpy.find_check("ratio_bounded")->pass);
  EXPECT_GT(bumpy.find_check("ratio_bounded")->value, 1e-3);
  EXPECT_TRUE(std::isfinite(bumpy.find_check("ratio_bounded")->value));
}

TEST(ClassicalLimit, ConstantTensorGivesZero) {
  const auto a = fourier::constant_coefficient(2, CMatrix::Identity(2, 2) * 1.5, 1.0);
  const auto s = fourier::constant_coefficient(2, CMatrix::Identity(1, 1), 1.0);
  const ModeSet ms(2, 1, 1);
  const auto grid = fourier::theta_grid(std::vector<int>{3, 3});
  const std::vector<double> eps{1e-2, 1e-1};
  const auto res = classical_limit_check(a, s, ms, grid, eps);
  EXPECT_EQ(res.rows.size(), 18u);
  for (const auto& r : res.rows) EXPECT_EQ(r.err, 0.0);
  EXPECT_TRUE(res.all_pass());
}

TEST(ClassicalLimit, CrossedLaminateWithinFrozenBound) {
  const auto a = crossed_laminate();
  const auto s = fourier::constant_coefficient(2, CMatrix::Identity(1, 1), 1.0);
  const ModeSet ms(2, 1, 6);
  const auto grid = fourier::theta_grid(std::vector<int>{5, 5});
  const auto eps = log_spaced(1e-3, 1e-1, 3);
  const auto res = classical_limit_check(a, s, ms, grid, eps);
  EXPECT_TRUE(res.all_pass());
  EXPECT_GT(res.max_err_ratio(), 0.0);
  EXPECT_LE(res.max_err_ratio(), 1.0);
}

TEST(Contract, IdentityTensor) {
  const std::vector<double> dir{0.3, -0.4};
  const CMatrix c = contract_with_direction(CMatrix::Identity(4, 4), dir, 2);
  EXPECT_LT((c - 0.25 * CMatrix::Identity(2, 2)).norm(), 1e-15);
  EXPECT_THROW(contract_with_direction(CMatrix::Identity(3, 3), dir, 2), InputError);
}
