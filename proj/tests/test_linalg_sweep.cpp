#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "fibrehom/linalg.hpp"
#include "fibrehom/random.hpp"
#include "fibrehom/sweep.hpp"
#include "oracles.hpp"

using namespace fibrehom;

TEST(Linalg, OperatorNormMatchesJacobiOracle) {
  Rng rng(3);
  for (int dim : {3, 17, 80}) {
    const CMatrix x = rng.gaussian(dim, dim);
    EXPECT_NEAR(op_norm(x), oracle::norm2(x), 1e-10 * oracle::norm2(x));
    EXPECT_NEAR(min_singular_value(x), oracle::min_singular(x), 1e-8 * oracle::norm2(x));
  }
}

TEST(Linalg, ClusteredSpectrumKeepsEverySingularValue) {
  // a unitary conjugate of a diagonal with heavily repeated entries
  Rng rng(11);
  const int dim = 72;
  RVector diag(dim);
  for (int i = 0; i < dim; ++i) diag(i) = 4.0 + 6.0 * (i % 5);
  const CMatrix u = rng.unitary(dim);
  const CMatrix v = rng.unitary(dim);
  const CMatrix x = u * diag.cast<Complex>().asDiagonal() * v.adjoint();
  const RVector sv = singular_values(x);
  EXPECT_NEAR(sv(0), 28.0, 1e-10);
  EXPECT_NEAR(sv(dim - 1), 4.0, 1e-9);
}

TEST(Linalg, EmptyMatricesHaveZeroNorm) {
  EXPECT_EQ(op_norm(CMatrix(0, 0)), 0.0);
  EXPECT_EQ(min_singular_value(CMatrix(0, 3)), 0.0);
}

TEST(Linalg, MinRealPartOfSkewPlusIdentity) {
  CMatrix x(2, 2);
  x << 2.0, 1.0, -1.0, 2.0;
  EXPECT_NEAR(min_real_part(x), 2.0, 1e-14);
}

TEST(Linalg, OrthonormalComplementSpansTheRest) {
  Rng rng(5);
  const CMatrix q = rng.unitary(9);
  const CMatrix basis = q.leftCols(4);
  const CMatrix r = orthonormal_complement(basis);
  ASSERT_EQ(r.cols(), 5);
  EXPECT_LT((r.adjoint() * r - CMatrix::Identity(5, 5)).norm(), 1e-12);
  EXPECT_LT((basis.adjoint() * r).norm(), 1e-12);
  EXPECT_EQ(orthonormal_complement(CMatrix(6, 0)).cols(), 6);
}

TEST(Linalg, CheckedInverseRejectsSingular) {
  CMatrix x = CMatrix::Zero(3, 3);
  x(0, 0) = 1.0;
  EXPECT_THROW(checked_inverse(x, "test"), HypothesisError);
  double cond = 0.0;
  const CMatrix y = CMatrix::Identity(3, 3) * 2.0;
  EXPECT_LT((checked_inverse(y, "test", &cond) - 0.5 * CMatrix::Identity(3, 3)).norm(), 1e-15);
  EXPECT_NEAR(cond, 1.0, 1e-12);
}

TEST(Sweep, LogLogFitRecoversPowerLaw) {
  const auto xs = log_spaced(1e-3, 1.0, 7);
  std::vector<double> ys;
  for (double x : xs) ys.push_back(3.0 * x * std::sqrt(x));
  const SlopeFit fit = fit_loglog(xs, ys);
  EXPECT_NEAR(fit.slope, 1.5, 1e-12);
  EXPECT_NEAR(std::exp(fit.intercept), 3.0, 1e-10);
  EXPECT_LT(fit.residual, 1e-12);
}

TEST(Sweep, LogSpacedEndpoints) {
  const auto v = log_spaced(1e-4, 1e-1, 4);
  ASSERT_EQ(v.size(), 4u);
  EXPECT_DOUBLE_EQ(v.front(), 1e-4);
  EXPECT_NEAR(v[1], 1e-3, 1e-18);
  EXPECT_DOUBLE_EQ(v.back(), 1e-1);
}

TEST(Sweep, RowsSortThetaThenEpsDescending) {
  SweepResult r;
  for (double t : {0.5, -1.0}) {
    for (double e : {0.01, 0.1}) {
      SweepRow row;
      row.theta = {t};
      row.eps = e;
      row.err = e * (t + 2.0);
      r.rows.push_back(row);
    }
  }
  r.sort_rows();
  EXPECT_EQ(r.rows[0].theta[0], -1.0);
  EXPECT_EQ(r.rows[0].eps, 0.1);
  EXPECT_EQ(r.rows[1].eps, 0.01);
  EXPECT_EQ(r.rows[2].theta[0], 0.5);
  const auto per_eps = r.max_err_by_eps();
  ASSERT_EQ(per_eps.size(), 2u);
  EXPECT_EQ(per_eps[0].first, 0.1);
  EXPECT_NEAR(per_eps[0].second, 0.25, 1e-15);
}

TEST(Sweep, VerdictsAndChecksDecideAllPass) {
  SweepResult r;
  SweepRow row;
  row.err = 1.0;
  row.bound = 2.0;
  r.rows.push_back(row);
  EXPECT_TRUE(r.all_pass());
  EXPECT_DOUBLE_EQ(r.max_err_ratio(), 0.5);
  r.rows.back().verdict = Verdict::flagged;
  EXPECT_TRUE(r.all_pass());
  r.checks.push_back({"x", 0.0, false});
  EXPECT_FALSE(r.all_pass());
  EXPECT_NE(r.find_check("x"), nullptr);
  EXPECT_EQ(r.find_check("y"), nullptr);
}

TEST(Sweep, ParallelForVisitsEachIndexOnce) {
  std::vector<std::atomic<int>> hits(257);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i].fetch_add(1); });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(Sweep, ParallelForRethrows) {
  EXPECT_THROW(parallel_for(10, [](std::size_t i) {
                 if (i == 7) throw std::runtime_error("boom");
               }),
               std::runtime_error);
}

TEST(Sweep, WorkerCountHonoursEnvironment) {
  setenv("FIBREHOM_WORKERS", "3", 1);
  EXPECT_EQ(worker_count(), 3);
  setenv("FIBREHOM_WORKERS", "junk", 1);
  EXPECT_GE(worker_count(), 1);
  unsetenv("FIBREHOM_WORKERS");
}
