#include "qpots/acquisition.hpp"
#include "qpots/benchmarks.hpp"

#include <gtest/gtest.h>

#include <limits>

using namespace qpots;

namespace {

MatrixXd random_points(Index n, Index d, Rng& rng) {
  MatrixXd X(n, d);
  for (Index i = 0; i < X.size(); ++i) X.data()[i] = rng.uniform();
  return X;
}

// Stagewise exhaustive maximin: at each stage scan every remaining
// candidate and compute its distance to every data and chosen point.
std::vector<Index> maximin_oracle(const MatrixXd& C, const MatrixXd& D, Index q) {
  std::vector<Index> chosen;
  for (Index s = 0; s < q; ++s) {
    Index arg = -1;
    double best = -1.0;
    for (Index i = 0; i < C.rows(); ++i) {
      if (std::find(chosen.begin(), chosen.end(), i) != chosen.end()) continue;
      double dmin = std::numeric_limits<double>::infinity();
      for (Index j = 0; j < D.rows(); ++j) dmin = std::min(dmin, (C.row(i) - D.row(j)).norm());
      for (Index c : chosen) dmin = std::min(dmin, (C.row(i) - C.row(c)).norm());
      if (dmin > best) {
        best = dmin;
        arg = i;
      }
    }
    chosen.push_back(arg);
  }
  return chosen;
}

QpotsOptions small_options() {
  QpotsOptions o;
  o.ea.pop_size = 20;
  o.ea.generations = 10;
  o.fit.n_starts = 2;
  o.budget = 30;
  return o;
}

Oracle bc_oracle() {
  const Benchmark b = make_benchmark("branin-currin");
  return [b](const VectorXd& x, Index) { return b.eval(x); };
}

BOState bc_state(std::uint64_t seed, const QpotsOptions& o) {
  const Benchmark b = make_benchmark("branin-currin");
  Rng rng(seed);
  const MatrixXd X = random_points(8, 2, rng);
  MatrixXd Y(8, 2);
  for (Index i = 0; i < 8; ++i) Y.row(i) = b.eval(X.row(i).transpose()).transpose();
  return make_state(Dataset(b.space, X, Y, 1e-3), seed, b.ref_point, o);
}

}  // namespace

TEST(MaximinSelect, MatchesExhaustiveOracleAndPrefix) {
  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    const Index N = 1 + rng.uniform_index(50);
    const Index n = rng.uniform_index(20);
    const Index d = 1 + rng.uniform_index(4);
    const Index q = 1 + rng.uniform_index(5);
    const MatrixXd C = random_points(N, d, rng);
    const MatrixXd D = random_points(n, d, rng);
    const DesignSpace space = DesignSpace::unit_cube(d);
    const AcquisitionBatch got = maximin_select(C, D, q, space);
    const Index qq = std::min(q, N);
    EXPECT_EQ(got.xstar_index, maximin_oracle(C, D, qq)) << "instance " << t;
    EXPECT_EQ(got.points.rows(), qq);
    const AcquisitionBatch one = maximin_select(C, D, 1, space);
    EXPECT_EQ(one.xstar_index.front(), got.xstar_index.front());
  }
}

TEST(MaximinSelect, TiesGoToLowestRow) {
  MatrixXd C(3, 1), D(1, 1);
  C << 0.0, 1.0, 0.5;
  D << 0.5;
  const auto b = maximin_select(C, D, 2, DesignSpace::unit_cube(1));
  EXPECT_EQ(b.xstar_index, (std::vector<Index>{0, 1}));
  EXPECT_DOUBLE_EQ(b.distance[0], 0.5);
}

TEST(MaximinSelect, UnitVersusRawMetric) {
  // Raw distances favor the wide axis, unit-cube distances do not.
  const DesignSpace space((VectorXd(2) << 0.0, 0.0).finished(), (VectorXd(2) << 1.0, 100.0).finished());
  MatrixXd C(2, 2), D(1, 2);
  C << 0.9, 0.0, 0.0, 30.0;
  D << 0.0, 0.0;
  EXPECT_EQ(maximin_select(C, D, 1, space, MaximinSpace::Unit).xstar_index.front(), 0);
  EXPECT_EQ(maximin_select(C, D, 1, space, MaximinSpace::Raw).xstar_index.front(), 1);
}

TEST(MaximinSelect, EmptyDataAndErrors) {
  MatrixXd C(3, 1);
  C << 0.2, 0.9, 0.4;
  const auto b = maximin_select(C, MatrixXd(0, 1), 3, DesignSpace::unit_cube(1));
  EXPECT_EQ(b.xstar_index.front(), 0);
  EXPECT_EQ(b.xstar_index[1], 1);
  EXPECT_THROW(maximin_select(MatrixXd(0, 1), C, 1, DesignSpace::unit_cube(1)), std::invalid_argument);
  EXPECT_THROW(maximin_select(C, C, 0, DesignSpace::unit_cube(1)), std::invalid_argument);
  EXPECT_THROW(maximin_select(C, MatrixXd::Zero(1, 2), 1, DesignSpace::unit_cube(1)), std::invalid_argument);
}

TEST(BOState, SeedRecordAndArchive) {
  const QpotsOptions o = small_options();
  const BOState s = bc_state(3, o);
  ASSERT_EQ(s.history.records.size(), 1u);
  EXPECT_EQ(s.history.records[0].iteration, 0);
  EXPECT_EQ(s.history.records[0].evaluations, 8);
  EXPECT_EQ(s.history.records[0].hv, s.archive_hv());
  EXPECT_EQ(s.models.size(), 2u);
  EXPECT_EQ(s.failures(), 0);
}

TEST(QpotsStep, GrowsDataAndKeepsHistoryConsistent) {
  QpotsOptions o = small_options();
  o.q = 2;
  BOState s = bc_state(4, o);
  const Oracle f = bc_oracle();
  for (int i = 0; i < 3; ++i) qpots_step(s, o, f);
  EXPECT_EQ(s.data.size(), 14);
  EXPECT_EQ(s.iteration, 3);
  ASSERT_EQ(s.history.records.size(), 4u);
  for (std::size_t i = 1; i < s.history.records.size(); ++i) {
    const auto& r = s.history.records[i];
    EXPECT_EQ(r.batch_X.rows(), 2);
    EXPECT_EQ(r.xstar_index.size(), 2u);
    EXPECT_GE(r.xstar_size, 1);
    EXPECT_GE(r.hv, s.history.records[i - 1].hv);
  }
}

TEST(QpotsStep, ClampsToBudget) {
  QpotsOptions o = small_options();
  o.q = 4;
  o.budget = 10;
  BOState s = bc_state(5, o);
  qpots_step(s, o, bc_oracle());
  EXPECT_EQ(s.data.size(), 10);
  EXPECT_THROW(qpots_step(s, o, bc_oracle()), std::logic_error);
}

TEST(QpotsStep, DeterministicGivenSeed) {
  const QpotsOptions o = small_options();
  BOState a = bc_state(6, o), b = bc_state(6, o);
  for (int i = 0; i < 2; ++i) {
    qpots_step(a, o, bc_oracle());
    qpots_step(b, o, bc_oracle());
  }
  EXPECT_EQ(a.data.X, b.data.X);
  EXPECT_EQ(a.data.Y, b.data.Y);
}

TEST(Incorporate, FailedObservationsAndAbort) {
  QpotsOptions o = small_options();
  o.budget = 20;
  BOState s = bc_state(7, o);
  Proposal p;
  p.batch.points = MatrixXd::Constant(1, 2, 0.5);
  MatrixXd y = MatrixXd::Constant(1, 2, std::numeric_limits<double>::quiet_NaN());
  incorporate(s, p, y, o);
  EXPECT_EQ(s.failures(), 1);
  EXPECT_EQ(s.models.front()->num_train(), 8);
  incorporate(s, p, y, o);
  p.batch.points(0, 0) = 0.6;
  // Third failure exceeds 10% of a budget of 20.
  EXPECT_THROW(incorporate(s, p, y, o), OracleFailureError);
}

TEST(EvaluateOracle, FailuresBecomeNanRows) {
  const Oracle f = [](const VectorXd& x, Index i) -> VectorXd {
    if (i == 1) throw OracleFailureError("boom");
    if (i == 2) return VectorXd::Constant(2, std::numeric_limits<double>::infinity());
    return x;
  };
  const MatrixXd Y = evaluate_oracle(f, MatrixXd::Constant(3, 2, 0.5), 0, 2);
  EXPECT_TRUE(Y.row(0).allFinite());
  EXPECT_TRUE(std::isnan(Y(1, 0)) && std::isnan(Y(2, 1)));
  const Oracle wrong = [](const VectorXd&, Index) { return VectorXd::Zero(3); };
  EXPECT_THROW(evaluate_oracle(wrong, MatrixXd::Zero(1, 2), 0, 2), std::runtime_error);
}

TEST(UpdateModels, RefitScheduleReusesHyperparameters) {
  QpotsOptions o = small_options();
  o.refit_every = 3;
  BOState s = bc_state(8, o);
  const auto h0 = s.hypers;
  const Oracle f = bc_oracle();
  qpots_step(s, o, f);  // iteration 1: re-condition only
  EXPECT_EQ(s.hypers, h0);
  EXPECT_EQ(s.models.front()->num_train(), 9);
  qpots_step(s, o, f);
  EXPECT_EQ(s.hypers, h0);
  qpots_step(s, o, f);  // iteration 3: refit
  EXPECT_NE(s.hypers, h0);
}

TEST(SolveInnerMoo, SharedPathSeedGivesIdenticalPathsForIdenticalModels) {
  // Two copies of the same objective: with a shared seed the two paths are
  // the same function, so the inner front collapses to points with Y1 == Y2.
  QpotsOptions o = small_options();
  o.shared_path_seed = true;
  const Benchmark b = make_benchmark("branin-currin");
  Rng rng(9);
  const MatrixXd X = random_points(8, 2, rng);
  MatrixXd Y(8, 2);
  for (Index i = 0; i < 8; ++i) Y.row(i) = VectorXd::Constant(2, b.eval(X.row(i).transpose())[1]).transpose();
  const BOState s = make_state(Dataset(b.space, X, Y, 1e-3), 9, VectorXd::Constant(2, 20.0), o);
  const ParetoArchive front = solve_inner_moo(s, o);
  for (Index i = 0; i < front.size(); ++i) EXPECT_EQ(front.Y(i, 0), front.Y(i, 1));
}
