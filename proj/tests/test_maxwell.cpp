#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fibrehom/linalg.hpp"
#include "fibrehom/maxwell.hpp"
#include "fibrehom/random.hpp"
#include "oracles.hpp"

using namespace fibrehom;
using namespace fibrehom::maxwell;

namespace {

// diag(2 + cos 2 pi y1, 3, 1.5 + 0.5 cos 2 pi y1)
CoefficientField diagonal_laminate() {
  CoefficientField c;
  c.d = 3;
  c.rows = c.cols = 3;
  CMatrix base = CMatrix::Zero(3, 3);
  base.diagonal() << 2.0, 3.0, 1.5;
  CMatrix wave = CMatrix::Zero(3, 3);
  wave.diagonal() << 0.5, 0.0, 0.25;
  c.modes[{0, 0, 0}] = base;
  c.modes[{1, 0, 0}] = wave;
  c.modes[{-1, 0, 0}] = wave;
  c.declared_nu = 1.0;
  c.real_valued = true;
  return c;
}

CoefficientField isotropic(double v) {
  return fourier::constant_coefficient(3, CMatrix::Identity(3, 3) * v, v);
}

}  // namespace

TEST(MaxwellFibre, StructureAndRestrictedBound) {
  const ModeSet ms(3, 3, 1);
  Rng rng(2);
  for (int i = 0; i < 2; ++i) {
    const Theta theta({rng.uniform(-3.1, 3.1), rng.uniform(-3.1, 3.1), rng.uniform(-3.1, 3.1)});
    const auto mf = build_maxwell_fibre(diagonal_laminate(), isotropic(1.2), ms, theta);
    EXPECT_LT((mf.fibre.a + mf.fibre.a.adjoint()).norm(), 1e-13);
    const auto rep = abstract::validate_hypothesis(mf.fibre);
    EXPECT_TRUE(rep.pass());
    EXPECT_LE(rep.c_r, 1.0 / std::numbers::pi + 1e-9);
    const CMatrix n = mf.fibre.n_basis;
    EXPECT_LT((n.adjoint() * n - CMatrix::Identity(n.cols(), n.cols())).norm(), 1e-12);
  }
}

TEST(CurlIdentities, HoldAtRandomQuasiMomenta) {
  const ModeSet ms(3, 3, 1);
  Rng rng(3);
  for (int i = 0; i < 3; ++i) {
    const Theta theta({rng.uniform(-3.1, 3.1), rng.uniform(-3.1, 3.1), rng.uniform(-3.1, 3.1)});
    const auto rep = curl_identities(ms, theta);
    EXPECT_TRUE(rep.pass(1e-12)) << rep.hermitian << " " << rep.compressed << " " << rep.commutator << " "
                                 << rep.gradient_kernel;
  }
  EXPECT_THROW(curl_identities(ModeSet(2, 2, 1), Theta({0.0, 0.0})), InputError);
}

TEST(Poincare, CurlOnComplementIsBoundedBelowByPi) {
  const ModeSet ms(3, 3, 1);
  const auto grid = fourier::theta_grid(std::vector<int>{2, 2, 2});
  const auto rep = curl_poincare_check(ms, grid);
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.min_singular.size(), 8u);
  // theta = (-pi, -pi, -pi): the mode (1, 0, 0) has |theta + 2 pi z| = pi sqrt 3
  EXPECT_NEAR(rep.overall_min, std::numbers::pi, 1e-12);
}

TEST(HomogenisedPerm, ConstantIsItselfAndLaminateMatchesMeans) {
  const ModeSet ms(3, 3, 12);
  const Theta zero = Theta::zero(3);
  EXPECT_LT((homogenised_perm(isotropic(2.5), ms, zero) - 2.5 * CMatrix::Identity(3, 3)).norm(), 1e-13);
  const CMatrix h = homogenised_perm(diagonal_laminate(), ms, zero);
  const double pi2 = 2.0 * std::numbers::pi;
  EXPECT_NEAR(h(0, 0).real(), oracle::harmonic_mean([&](double y) { return 2.0 + std::cos(pi2 * y); }), 1e-12);
  EXPECT_NEAR(h(1, 1).real(), 3.0, 1e-12);
  EXPECT_NEAR(h(2, 2).real(), 1.5, 1e-12);
  EXPECT_LT(std::abs(h(0, 1)) + std::abs(h(1, 2)) + std::abs(h(0, 2)), 1e-12);
}

TEST(Equivalence, LaminateAgreesAndGradientSourcesAreRejected) {
  const ModeSet ms(3, 3, 2);
  const Theta theta({0.4, -0.3, 0.2});
  const auto rep = ehom_equivalence(diagonal_laminate(), isotropic(1.3), ms, theta, 0.1, std::uint64_t{7}, 4);
  EXPECT_TRUE(rep.pass);
  EXPECT_LT(rep.max_gap, 1e-10);
  EXPECT_LT(rep.max_gradient_component, 1e-12);

  // a pure gradient at mode (1, 0, 0)
  CVector g = CVector::Zero(static_cast<Index>(ms.size()) * 3);
  const auto idx = ms.index_of({1, 0, 0});
  ASSERT_TRUE(idx.has_value());
  const auto k = fourier::wave_vector(theta, {1, 0, 0});
  for (int c = 0; c < 3; ++c) g(static_cast<Index>(*idx) * 3 + c) = k[static_cast<std::size_t>(c)];
  EXPECT_GT(gradient_component(ms, theta, g), 1.0);
  EXPECT_LT(gradient_component(ms, theta, admissible_part(ms, theta, g)), 1e-12);
  try {
    ehom_equivalence(diagonal_laminate(), isotropic(1.3), ms, theta, 0.1, std::vector<CVector>{g});
    FAIL() << "expected a hypothesis error";
  } catch (const HypothesisError& e) {
    EXPECT_GT(e.measured(), 1.0);
  }
}

TEST(Maxhom, LaminateWithinBudget) {
  const ModeSet ms(3, 3, 2);
  const auto grid = fourier::theta_grid(std::vector<int>{2, 1, 1});
  const auto eta = log_spaced(1e-3, 1e-1, 3);
  const auto res = certify_maxhom(diagonal_laminate(), isotropic(1.3), ms, grid, eta);
  EXPECT_TRUE(res.all_pass());
  for (const auto& r : res.rows) {
    if (r.verdict == Verdict::pass) EXPECT_LE(r.err, r.bound + 1e-8);
  }
  EXPECT_GT(res.slope, 0.85);
  EXPECT_LT(res.slope, 1.3);
}
