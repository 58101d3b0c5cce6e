#include "qpots/benchmarks.hpp"
#include "qpots/nsga2.hpp"
#include "qpots/pareto.hpp"

#include <gtest/gtest.h>

#include <limits>

using namespace qpots;

namespace {

BatchObjective rowwise(const std::function<VectorXd(const VectorXd&)>& f, Index K) {
  return [f, K](const MatrixXd& X) {
    MatrixXd Y(X.rows(), K);
    for (Index i = 0; i < X.rows(); ++i) Y.row(i) = f(X.row(i).transpose()).transpose();
    return Y;
  };
}

BatchObjective zdt3_objective() {
  return rowwise([](const VectorXd& x) { return zdt3(x); }, 2);
}

}  // namespace

TEST(EAConfig, Validation) {
  EAConfig c;
  EXPECT_NO_THROW(c.validate());
  c.pop_size = 7;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.pop_size = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EAConfig m;
  EXPECT_DOUBLE_EQ(m.mutation_prob_for(4), 0.25);
  m.mutation_prob = 0.5;
  EXPECT_DOUBLE_EQ(m.mutation_prob_for(4), 0.5);
}

TEST(Operators, StayInBounds) {
  const DesignSpace space(VectorXd::Constant(3, -1.0), VectorXd::Constant(3, 2.0));
  EAConfig cfg;
  cfg.crossover_prob = 1.0;
  cfg.mutation_prob = 1.0;
  Rng rng(5);
  for (int t = 0; t < 500; ++t) {
    VectorXd a(3), b(3);
    for (Index i = 0; i < 3; ++i) {
      a[i] = rng.uniform(-1.0, 2.0);
      b[i] = rng.uniform(-1.0, 2.0);
    }
    if (t % 7 == 0) a[0] = -1.0;
    if (t % 11 == 0) b[2] = 2.0;
    auto [c1, c2] = sbx_crossover(a, b, space, cfg, rng);
    EXPECT_TRUE(space.contains(c1));
    EXPECT_TRUE(space.contains(c2));
    EXPECT_TRUE(space.contains(polynomial_mutation(c1, space, cfg, rng)));
  }
}

TEST(Operators, DisabledOperatorsCopy) {
  const DesignSpace space = DesignSpace::unit_cube(2);
  EAConfig cfg;
  cfg.crossover_prob = 0.0;
  cfg.mutation_prob = 0.0;
  Rng rng(1);
  const VectorXd a = (VectorXd(2) << 0.1, 0.9).finished();
  const VectorXd b = (VectorXd(2) << 0.6, 0.3).finished();
  auto [c1, c2] = sbx_crossover(a, b, space, cfg, rng);
  EXPECT_EQ(c1, a);
  EXPECT_EQ(c2, b);
  EXPECT_EQ(polynomial_mutation(a, space, cfg, rng), a);
  // Identical parents produce identical children even when crossover fires.
  cfg.crossover_prob = 1.0;
  auto [d1, d2] = sbx_crossover(a, a, space, cfg, rng);
  EXPECT_EQ(d1, a);
  EXPECT_EQ(d2, a);
}

TEST(Operators, SbxPreservesParentMean) {
  // Without clamping the SBX children are symmetric around the parents' mean.
  const DesignSpace space(VectorXd::Constant(1, -100.0), VectorXd::Constant(1, 100.0));
  EAConfig cfg;
  cfg.crossover_prob = 1.0;
  Rng rng(2);
  const VectorXd a = VectorXd::Constant(1, 0.2);
  const VectorXd b = VectorXd::Constant(1, 0.7);
  for (int t = 0; t < 100; ++t) {
    auto [c1, c2] = sbx_crossover(a, b, space, cfg, rng);
    EXPECT_NEAR(c1[0] + c2[0], 0.9, 1e-12);
  }
}

TEST(Nsga2, SphereSingleObjective) {
  const DesignSpace space(VectorXd::Constant(2, -5.0), VectorXd::Constant(2, 5.0));
  EAConfig cfg;
  cfg.pop_size = 50;
  cfg.generations = 50;
  cfg.seed = 3;
  const auto obj = rowwise([](const VectorXd& x) { return VectorXd::Constant(1, x.squaredNorm()); }, 1);
  const NsgaResult r = nsga2(obj, space, cfg);
  ASSERT_GE(r.front.size(), 1);
  EXPECT_LT(r.front.Y.minCoeff(), 1e-3);
  EXPECT_EQ(r.evaluations, 50 + 50 * 50);
}

TEST(Nsga2, Zdt3ReachesTrueFront) {
  const Benchmark b = make_benchmark("zdt3-d5");
  const MatrixXd truth = zdt3_true_front(500);
  EAConfig cfg;
  cfg.pop_size = 200;
  cfg.generations = 100;
  for (std::uint64_t s = 0; s < 3; ++s) {
    cfg.seed = s;
    const NsgaResult r = nsga2(zdt3_objective(), b.space, cfg);
    EXPECT_LT(igd(r.front.Y, truth), 0.05) << "seed " << s;
  }
}

TEST(Nsga2, PopulationHypervolumeNeverDecreases) {
  const Benchmark b = make_benchmark("zdt3-d5");
  EAConfig cfg;
  cfg.pop_size = 40;
  cfg.generations = 60;
  cfg.seed = 11;
  const VectorXd ref = VectorXd::Constant(2, 11.0);
  double prev = -1.0;
  int calls = 0;
  nsga2(zdt3_objective(), b.space, cfg, MatrixXd(), [&](int gen, const MatrixXd&, const MatrixXd& Y) {
    EXPECT_EQ(gen, calls++);
    const auto nd = nondominated_filter(Y);
    MatrixXd F(static_cast<Index>(nd.size()), 2);
    for (std::size_t i = 0; i < nd.size(); ++i) F.row(static_cast<Index>(i)) = Y.row(nd[i]);
    const double hv = hypervolume(F, ref);
    EXPECT_GE(hv, prev - 1e-12 * std::abs(prev)) << "generation " << gen;
    prev = hv;
  });
  EXPECT_EQ(calls, cfg.generations + 1);
}

TEST(Nsga2, DeterministicGivenSeed) {
  const Benchmark b = make_benchmark("zdt3-d5");
  EAConfig cfg;
  cfg.pop_size = 20;
  cfg.generations = 10;
  cfg.seed = 4;
  const NsgaResult a = nsga2(zdt3_objective(), b.space, cfg);
  const NsgaResult c = nsga2(zdt3_objective(), b.space, cfg);
  EXPECT_EQ(a.population_X, c.population_X);
  EXPECT_EQ(a.front.Y, c.front.Y);
  cfg.seed = 5;
  EXPECT_NE(nsga2(zdt3_objective(), b.space, cfg).population_X, a.population_X);
}

TEST(Nsga2, InjectsIncumbents) {
  const DesignSpace space = DesignSpace::unit_cube(2);
  EAConfig cfg;
  cfg.pop_size = 20;
  cfg.generations = 1;
  MatrixXd inc(5, 2);
  inc << 0.11, 0.12, 0.21, 0.22, 0.31, 0.32, 0.41, 0.42, 0.51, 0.52;
  MatrixXd gen0;
  const auto obj = rowwise([](const VectorXd& x) { return x; }, 2);
  nsga2(obj, space, cfg, inc, [&](int g, const MatrixXd& X, const MatrixXd&) {
    if (g == 0) gen0 = X;
  });
  // At most 10% of the population: the first two incumbents.
  EXPECT_EQ(gen0.row(0), inc.row(0));
  EXPECT_EQ(gen0.row(1), inc.row(1));
  for (Index i = 2; i < gen0.rows(); ++i) EXPECT_NE(gen0.row(i), inc.row(2));

  cfg.inject_incumbents = false;
  nsga2(obj, space, cfg, inc, [&](int g, const MatrixXd& X, const MatrixXd&) {
    if (g == 0) gen0 = X;
  });
  EXPECT_NE(gen0.row(0), inc.row(0));
}

TEST(Nsga2, QuarantinesNonFiniteObjectives) {
  const DesignSpace space = DesignSpace::unit_cube(2);
  EAConfig cfg;
  cfg.pop_size = 20;
  cfg.generations = 10;
  const auto obj = rowwise(
      [](const VectorXd& x) {
        VectorXd y = (VectorXd(2) << x[0], 1.0 - x[0] + x[1]).finished();
        if (x[1] > 0.5) y[1] = std::numeric_limits<double>::quiet_NaN();
        return y;
      },
      2);
  const NsgaResult r = nsga2(obj, space, cfg);
  EXPECT_GT(r.quarantined, 0);
  EXPECT_TRUE(r.front.Y.allFinite());
  for (Index i = 0; i < r.front.size(); ++i) EXPECT_LE(r.front.X(i, 1), 0.5);
}

TEST(Nsga2, ArchiveAllIsAtLeastAsGood) {
  const Benchmark b = make_benchmark("zdt3-d5");
  EAConfig cfg;
  cfg.pop_size = 20;
  cfg.generations = 15;
  cfg.seed = 8;
  const NsgaResult last = nsga2(zdt3_objective(), b.space, cfg);
  cfg.archive_all = true;
  const NsgaResult all = nsga2(zdt3_objective(), b.space, cfg);
  const VectorXd ref = VectorXd::Constant(2, 11.0);
  EXPECT_GE(hypervolume(all.front.Y, ref), hypervolume(last.front.Y, ref) - 1e-12);
}

TEST(Nsga2, WrongObjectiveShapeThrows) {
  const DesignSpace space = DesignSpace::unit_cube(2);
  EAConfig cfg;
  cfg.pop_size = 4;
  cfg.generations = 1;
  const BatchObjective bad = [](const MatrixXd& X) { return MatrixXd::Zero(X.rows() + 1, 2); };
  EXPECT_THROW(nsga2(bad, space, cfg), std::exception);
}
