#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "fibrehom/coefficient.hpp"
#include "fibrehom/linalg.hpp"
#include "fibrehom/random.hpp"
#include "oracles.hpp"

using namespace fibrehom;
using namespace fibrehom::fourier;

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

}  // namespace

TEST(Coefficient, EvaluateLaminate) {
  const auto a = laminate();
  const std::vector<double> y{0.25};
  EXPECT_NEAR(a.evaluate(y)(0, 0).real(), 2.0, 1e-15);
  EXPECT_NEAR(a.evaluate(std::vector<double>{0.5})(0, 0).real(), 1.0, 1e-15);
  EXPECT_EQ(a.bandwidth(), 1);
  EXPECT_FALSE(a.is_constant());
}

TEST(Coefficient, CoercivityMatchesSampledOracle) {
  const auto a = laminate();
  const auto rep = validate_coefficient(a);
  const double oracle_nu =
      oracle::sampled_min_eig([&](const std::vector<double>& y) { return CMatrix(a.evaluate(y)); }, 1, 1000);
  EXPECT_NEAR(rep.measured_nu, oracle_nu, 1e-12);
  EXPECT_NEAR(rep.measured_nu, 1.0, 1e-12);
}

TEST(Coefficient, RejectsLowCoercivityWithPoint) {
  auto a = laminate();
  a.declared_nu = 1.5;
  try {
    validate_coefficient(a);
    FAIL() << "expected a coercivity error";
  } catch (const CoercivityError& e) {
    EXPECT_NEAR(e.measured(), 1.0, 1e-12);
    EXPECT_NE(std::string(e.what()).find("y = (0.5"), std::string::npos);
  }
}

TEST(Coefficient, RejectsBrokenRealityConstraint) {
  auto a = laminate();
  a.modes[{1, 0, 0}] = CMatrix::Constant(1, 1, Complex(0.5, 0.1));
  EXPECT_THROW(validate_coefficient(a), InputError);
  a.real_valued = false;
  EXPECT_NO_THROW(validate_coefficient(a));
}

TEST(Coefficient, RandomFieldsHonourDeclaredNu) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const bool real = seed % 2 == 0;
    const auto a = random_coefficient(seed, 2, 2, 1, 0.5, real);
    EXPECT_NO_THROW(validate_coefficient(a));
    const double lo =
        oracle::sampled_min_eig([&](const std::vector<double>& y) { return CMatrix(a.evaluate(y)); }, 2, 40);
    EXPECT_GE(lo, 0.5 - 1e-12);
    if (real) {
      for (int i = 0; i < 5; ++i) {
        const std::vector<double> y{0.13 * i, 0.37 * i};
        EXPECT_LT(a.evaluate(y).imag().norm(), 1e-12);
      }
    }
  }
}

TEST(Multiplication, MatchesQuadratureProduct) {
  Rng rng(12);
  const auto a = random_coefficient(3, 2, 2, 1, 1.0, false);
  const ModeSet ms(2, 2, 2);
  const CVector u = rng.gaussian(ms.scalar_size());
  const CVector au = multiplication_matrix(a, ms) * u;
  auto product = [&](const std::vector<double>& y) -> CMatrix {
    CVector v = CVector::Zero(2);
    for (std::size_t m = 0; m < ms.size(); ++m) {
      double phase = 0;
      for (int j = 0; j < 2; ++j) phase += 2.0 * std::numbers::pi * ms.mode(m)[j] * y[j];
      v += u.segment(static_cast<Index>(m) * 2, 2) * std::exp(Complex(0.0, phase));
    }
    return a.evaluate(y) * v;
  };
  for (std::size_t m = 0; m < ms.size(); ++m) {
    const auto z = ms.mode(m);
    const CMatrix c = oracle::fourier_coefficient(product, 2, {z[0], z[1]}, 12);
    EXPECT_LT((c - au.segment(static_cast<Index>(m) * 2, 2)).norm(), 1e-12);
  }
}

TEST(Multiplication, ShapeChecks) {
  const ModeSet ms(2, 1, 1);
  EXPECT_NO_THROW(multiplication_matrix(random_coefficient(0, 2, 1, 1, 1.0, true), ms));
  EXPECT_NO_THROW(multiplication_matrix(random_coefficient(0, 2, 2, 1, 1.0, true), ms));
  EXPECT_THROW(multiplication_matrix(random_coefficient(0, 2, 3, 1, 1.0, true), ms), InputError);
  EXPECT_THROW(multiplication_matrix(random_coefficient(0, 1, 1, 1, 1.0, true), ms), InputError);
}

TEST(DivergenceForm, EqualsGradAdjointMultGrad) {
  Rng rng(14);
  for (int d : {1, 2}) {
    const auto a = random_coefficient(20 + d, d, 2 * d, 1, 1.0, false);
    const ModeSet ms(d, 2, 2);
    std::vector<double> t;
    for (int j = 0; j < d; ++j) t.push_back(rng.uniform(-3.0, 3.0));
    const Theta theta(t);
    const CMatrix g = grad_theta_matrix(ms, theta);
    const CMatrix dense = g.adjoint() * multiplication_matrix(a, ms) * g;
    const CMatrix direct = divergence_form_matrix(a, ms, theta, all_modes(ms));
    EXPECT_LT(oracle::rel(direct, dense), 1e-13);
  }
}

TEST(Blocks, PartitionAndInvariance) {
  CoefficientField a;
  a.d = 2;
  a.modes[{0, 0, 0}] = CMatrix::Identity(1, 1) * 3.0;
  a.modes[{1, 1, 0}] = CMatrix::Identity(1, 1) * 0.5;
  a.modes[{-1, -1, 0}] = CMatrix::Identity(1, 1) * 0.5;
  const ModeSet ms(2, 1, 2);
  const CoefficientField* coefs[] = {&a};
  const auto blocks = coupled_mode_blocks(ms, coefs);
  EXPECT_EQ(blocks.size(), 9u);  // diagonals z1 - z2 = const
  EXPECT_EQ(blocks.front().front(), 0u);
  std::set<std::size_t> seen;
  for (const auto& b : blocks) {
    EXPECT_TRUE(std::is_sorted(b.begin(), b.end()));
    for (std::size_t i : b) EXPECT_TRUE(seen.insert(i).second);
  }
  EXPECT_EQ(seen.size(), ms.size());
  // the full matrix has no entries between blocks
  const CMatrix full = multiplication_matrix(a, ms);
  for (std::size_t p = 0; p < blocks.size(); ++p) {
    for (std::size_t q = 0; q < blocks.size(); ++q) {
      if (p == q) continue;
      for (std::size_t i : blocks[p]) {
        for (std::size_t j : blocks[q]) EXPECT_EQ(full(i, j), Complex(0.0));
      }
    }
  }
}

TEST(Support, SkipsZeroBlocks) {
  auto a = laminate();
  a.modes[{2, 0, 0}] = CMatrix::Zero(1, 1);
  EXPECT_EQ(support(a).size(), 3u);
  EXPECT_TRUE(constant_coefficient(2, CMatrix::Identity(2, 2), 1.0).is_constant());
}
