#include "qpots/baselines.hpp"
#include "qpots/benchmarks.hpp"

#include <gtest/gtest.h>

using namespace qpots;

namespace {

QpotsOptions small_options() {
  QpotsOptions o;
  o.ea.pop_size = 20;
  o.ea.generations = 20;
  o.fit.n_starts = 2;
  return o;
}

BOState quadratic_state(std::uint64_t seed) {
  // f1 = (x - 0.3)^2, f2 = (x - 0.8)^2 on [0, 1], densely sampled.
  const DesignSpace space = DesignSpace::unit_cube(1);
  const MatrixXd X = VectorXd::LinSpaced(15, 0.0, 1.0);
  MatrixXd Y(15, 2);
  Y.col(0) = (X.col(0).array() - 0.3).square();
  Y.col(1) = (X.col(0).array() - 0.8).square();
  return make_state(Dataset(space, X, Y, 1e-6), seed, VectorXd::Constant(2, 1.0), small_options());
}

}  // namespace

TEST(Chebyshev, HandValue) {
  const VectorXd f = (VectorXd(3) << 1.0, 4.0, 2.0).finished();
  const VectorXd w = (VectorXd(3) << 0.5, 0.25, 0.25).finished();
  // w.f = (0.5, 1, 0.5): max 1 + 0.05 * 2.
  EXPECT_DOUBLE_EQ(chebyshev(f, w), 1.1);
}

TEST(SimplexWeights, OnTheSimplexAndUniformOnAverage) {
  Rng rng(1);
  VectorXd mean = VectorXd::Zero(3);
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const VectorXd w = simplex_weights(3, rng);
    EXPECT_NEAR(w.sum(), 1.0, 1e-12);
    EXPECT_TRUE((w.array() >= 0.0).all());
    mean += w;
  }
  mean /= n;
  for (Index k = 0; k < 3; ++k) EXPECT_NEAR(mean[k], 1.0 / 3.0, 0.01);
}

TEST(SobolStep, AppendsSobolPointsInOrder) {
  const Benchmark b = make_benchmark("branin-currin");
  const Oracle f = [b](const VectorXd& x, Index) { return b.eval(x); };
  const MatrixXd X0 = MatrixXd::Constant(2, 2, 0.1) + MatrixXd::Identity(2, 2) * 0.5;
  MatrixXd Y0(2, 2);
  for (Index i = 0; i < 2; ++i) Y0.row(i) = b.eval(X0.row(i).transpose()).transpose();
  QpotsOptions o;
  BOState s = make_state(Dataset(b.space, X0, Y0, 0.0), 1, b.ref_point, o, false);
  EXPECT_TRUE(s.models.empty());
  SobolStream stream(2);
  sobol_step(s, 3, 4, stream, f);  // clamped to the budget of 4
  ASSERT_EQ(s.data.size(), 4);
  EXPECT_EQ(s.data.X(2, 0), 0.5);
  EXPECT_EQ(s.data.X(3, 0), 0.75);
  EXPECT_EQ(s.history.records.back().evaluations, 4);
  EXPECT_THROW(sobol_step(s, 1, 4, stream, f), std::logic_error);
}

TEST(ProposeScalarized, ForcedWeightsFindTheMinimizerOfThatObjective) {
  const BOState s = quadratic_state(2);
  const QpotsOptions o = small_options();
  const Proposal p1 = propose_scalarized(s, o, 1, VectorXd{{1.0, 0.0}});
  EXPECT_NEAR(p1.batch.points(0, 0), 0.3, 0.1);
  const Proposal p2 = propose_scalarized(s, o, 1, VectorXd{{0.0, 1.0}});
  EXPECT_NEAR(p2.batch.points(0, 0), 0.8, 0.1);
}

TEST(ProposeScalarized, BatchSlotsAndDeterminism) {
  const BOState s = quadratic_state(3);
  const QpotsOptions o = small_options();
  const Proposal a = propose_scalarized(s, o, 3);
  const Proposal b = propose_scalarized(s, o, 3);
  ASSERT_EQ(a.batch.points.rows(), 3);
  EXPECT_EQ(a.batch.points, b.batch.points);
  for (Index i = 0; i < 3; ++i) EXPECT_TRUE(s.data.space.contains(a.batch.points.row(i).transpose()));
  EXPECT_THROW(propose_scalarized(s, o, 1, VectorXd::Ones(3)), std::invalid_argument);
}

TEST(ScalarizedTsStep, RecordsIteration) {
  BOState s = quadratic_state(4);
  QpotsOptions o = small_options();
  o.q = 2;
  o.budget = 18;
  const Oracle f = [](const VectorXd& x, Index) {
    return VectorXd{{(x[0] - 0.3) * (x[0] - 0.3), (x[0] - 0.8) * (x[0] - 0.8)}};
  };
  scalarized_ts_step(s, o, f);
  scalarized_ts_step(s, o, f);
  EXPECT_EQ(s.data.size(), 18);
  EXPECT_EQ(s.history.records.size(), 3u);
  EXPECT_THROW(scalarized_ts_step(s, o, f), std::logic_error);
}
