#include "qpots/gp.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace qpots;

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double k52(const VectorXd& a, const VectorXd& b, const VectorXd& ls, double s2) {
  const double r = ((a - b).array() / ls.array()).matrix().norm();
  const double s = std::sqrt(5.0) * r;
  return s2 * (1.0 + s + s * s / 3.0) * std::exp(-s);
}

MatrixXd gram(const MatrixXd& A, const MatrixXd& B, const VectorXd& ls, double s2) {
  MatrixXd G(A.rows(), B.rows());
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = 0; j < B.rows(); ++j) G(i, j) = k52(A.row(i).transpose(), B.row(j).transpose(), ls, s2);
  return G;
}

Dataset random_dataset(Index n, Index d, std::uint64_t seed, double noise, double lo = -2.0, double hi = 3.0) {
  Rng rng(seed);
  DesignSpace space(VectorXd::Constant(d, lo), VectorXd::Constant(d, hi));
  MatrixXd X(n, d);
  for (Index i = 0; i < X.size(); ++i) X.data()[i] = rng.uniform(lo, hi);
  MatrixXd Y(n, 1);
  for (Index i = 0; i < n; ++i) Y(i, 0) = std::sin(X.row(i).sum()) + 0.3 * X(i, 0) * X(i, 0) + 2.0;
  return Dataset(space, X, Y, noise);
}

GPHyperparams hyp(Index d, double ls, double s2, double noise) {
  GPHyperparams h;
  h.lengthscales = VectorXd::LinSpaced(d, ls, 2.0 * ls);
  h.signal_var = s2;
  h.noise_var = noise;
  return h;
}

// Dense textbook posterior with a constant prior mean, using a general LU
// solve rather than Cholesky.
Posterior dense_posterior(const Dataset& data, const GPHyperparams& h, double prior_mean, const MatrixXd& Xq) {
  MatrixXd K = gram(data.X, data.X, h.lengthscales, h.signal_var);
  K.diagonal().array() += h.noise_var;
  const MatrixXd Ks = gram(Xq, data.X, h.lengthscales, h.signal_var);
  const Eigen::FullPivLU<MatrixXd> lu(K);
  Posterior p;
  const VectorXd resid = data.Y.col(0).array() - prior_mean;
  p.mean = (Ks * lu.solve(resid)).array() + prior_mean;
  p.cov = gram(Xq, Xq, h.lengthscales, h.signal_var) - Ks * lu.solve(Ks.transpose());
  return p;
}

double rel_err(const MatrixXd& a, const MatrixXd& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

}  // namespace

class GPPosteriorDense : public ::testing::TestWithParam<std::tuple<Index, Index, bool>> {};

TEST_P(GPPosteriorDense, MatchesIndependentDenseEvaluation) {
  const auto [d, n, standardize] = GetParam();
  const Dataset data = random_dataset(n, d, 100 + static_cast<std::uint64_t>(n + d), 1e-3);
  const GPHyperparams h = hyp(d, 1.2, 2.0, 1e-3);
  const GPModel m = GPModel::condition(data, 0, h, standardize);
  const Dataset q = random_dataset(9, d, 7, 0.0);
  const Posterior got = posterior(m, q.X);
  const double mu0 = standardize ? data.Y.col(0).mean() : 0.0;
  const Posterior want = dense_posterior(data, h, mu0, q.X);
  EXPECT_LT(rel_err(got.mean, want.mean), 1e-8);
  EXPECT_LT(rel_err(got.cov, want.cov), 1e-8);

  const Posterior marg = posterior_marginals(m, q.X);
  EXPECT_LT(rel_err(marg.mean, want.mean), 1e-8);
  EXPECT_LT(rel_err(VectorXd(marg.cov.diagonal()), VectorXd(want.cov.diagonal())), 1e-8);
}

INSTANTIATE_TEST_SUITE_P(Shapes, GPPosteriorDense,
                         ::testing::Values(std::make_tuple(Index{1}, Index{10}, true),
                                           std::make_tuple(Index{1}, Index{50}, false),
                                           std::make_tuple(Index{3}, Index{25}, true),
                                           std::make_tuple(Index{3}, Index{50}, true)));

TEST(GPModel, NoiseFreeInterpolation) {
  DesignSpace space(VectorXd::Zero(1), VectorXd::Ones(1));
  const MatrixXd X = VectorXd::LinSpaced(8, 0.0, 1.0);
  MatrixXd Y(8, 1);
  for (Index i = 0; i < 8; ++i) Y(i, 0) = std::cos(4.0 * X(i, 0));
  const Dataset data(space, X, Y, 0.0);
  GPHyperparams h;
  h.lengthscales = VectorXd::Constant(1, 0.3);
  h.signal_var = 1.0;
  const GPModel m = GPModel::condition(data, 0, h);
  ASSERT_EQ(m.jitter(), 0.0);
  const Posterior p = posterior(m, X);
  for (Index i = 0; i < 8; ++i) {
    EXPECT_NEAR(p.mean[i], Y(i, 0), 1e-8 * std::max(1.0, std::abs(Y(i, 0))));
    EXPECT_NEAR(p.cov(i, i), 0.0, 1e-8);
  }
}

TEST(GPModel, FailedRowsAreIgnored) {
  Dataset data = random_dataset(12, 2, 5, 1e-3);
  Dataset with_nan = data;
  with_nan.append(VectorXd::Constant(2, 0.5), VectorXd::Constant(1, std::nan("")));
  const GPHyperparams h = hyp(2, 1.0, 1.0, 1e-3);
  const GPModel a = GPModel::condition(data, 0, h);
  const GPModel b = GPModel::condition(with_nan, 0, h);
  EXPECT_EQ(b.num_train(), 12);
  const MatrixXd q = MatrixXd::Constant(1, 2, 0.1);
  EXPECT_EQ(posterior(a, q).mean, posterior(b, q).mean);
}

TEST(GPModel, RejectsBadInputs) {
  const Dataset data = random_dataset(5, 2, 1, 1e-3);
  GPHyperparams h = hyp(3, 1.0, 1.0, 1e-3);
  EXPECT_THROW(GPModel::condition(data, 0, h), std::invalid_argument);
  h = hyp(2, 1.0, -1.0, 1e-3);
  EXPECT_THROW(GPModel::condition(data, 0, h), std::invalid_argument);
  EXPECT_THROW(GPModel::condition(data, 1, hyp(2, 1.0, 1.0, 1e-3)), std::invalid_argument);
  const GPModel m = GPModel::condition(data, 0, hyp(2, 1.0, 1.0, 1e-3));
  EXPECT_THROW(posterior(m, MatrixXd::Zero(1, 3)), std::invalid_argument);
}

TEST(LogMarginalLikelihood, SinglePointClosedForm) {
  // One observation y = 0 with total prior variance 1: -0.5 log(2 pi).
  GPHyperparams h;
  h.lengthscales = VectorXd::Ones(1);
  h.signal_var = 0.75;
  h.noise_var = 0.25;
  const auto r = log_marginal_likelihood_with_gradient(h, MatrixXd::Zero(1, 1), VectorXd::Zero(1));
  EXPECT_NEAR(r.value, -0.5 * kLog2Pi, 1e-14);
}

TEST(LogMarginalLikelihood, MatchesDenseFormula) {
  const Dataset data = random_dataset(20, 2, 8, 1e-2, 0.0, 1.0);
  const GPHyperparams h = hyp(2, 0.4, 1.5, 1e-2);
  MatrixXd K = gram(data.X, data.X, h.lengthscales, h.signal_var);
  K.diagonal().array() += h.noise_var;
  const VectorXd y = data.Y.col(0);
  const Eigen::FullPivLU<MatrixXd> lu(K);
  const double want = -0.5 * y.dot(lu.solve(y)) - 0.5 * std::log(lu.determinant()) - 10.0 * kLog2Pi;
  EXPECT_NEAR(log_marginal_likelihood_with_gradient(h, data.X, y).value, want, 1e-9 * std::abs(want));
}

TEST(LogMarginalLikelihood, GradientMatchesFiniteDifferences) {
  const Dataset data = random_dataset(25, 3, 12, 1e-2, 0.0, 1.0);
  const VectorXd y = data.Y.col(0).array() - data.Y.col(0).mean();
  GPHyperparams h = hyp(3, 0.5, 1.3, 2e-2);
  const auto r = log_marginal_likelihood_with_gradient(h, data.X, y);
  ASSERT_EQ(r.grad_log.size(), 5);
  auto perturbed = [&](Index i, double eps) {
    GPHyperparams g = h;
    if (i < 3) g.lengthscales[i] *= std::exp(eps);
    else if (i == 3) g.signal_var *= std::exp(eps);
    else g.noise_var *= std::exp(eps);
    return log_marginal_likelihood_with_gradient(g, data.X, y).value;
  };
  const double eps = 1e-5;
  for (Index i = 0; i < 5; ++i) {
    const double fd = (perturbed(i, eps) - perturbed(i, -eps)) / (2.0 * eps);
    EXPECT_NEAR(r.grad_log[i], fd, 1e-5 * std::max(1.0, std::abs(fd))) << "parameter " << i;
  }
}

TEST(FitGp, ImprovesEvidenceAndIsDeterministic) {
  const Dataset data = random_dataset(30, 2, 21, 1e-3);
  Rng r1(4), r2(4);
  const GPModel a = fit_gp(data, 0, r1);
  const GPModel b = fit_gp(data, 0, r2);
  EXPECT_EQ(a.hyper(), b.hyper());
  EXPECT_EQ(a.hyper().noise_var, 1e-3);
  // The fitted evidence beats a few arbitrary settings.
  const double best = log_marginal_likelihood(a.hyper(), data, 0);
  for (double ls : {0.1, 1.0, 10.0}) {
    GPHyperparams h = hyp(2, ls, 1.0, 1e-3);
    h.lengthscales.setConstant(ls);
    EXPECT_GT(best, log_marginal_likelihood(h, data, 0));
  }
}

TEST(FitGp, WarmStartReachesSameOptimum) {
  const Dataset data = random_dataset(30, 2, 22, 1e-3);
  Rng rng(1);
  const GPModel a = fit_gp(data, 0, rng);
  FitOptions fo;
  fo.n_starts = 1;
  fo.warm_start = a.hyper();
  Rng rng2(99);
  const GPModel b = fit_gp(data, 0, rng2, fo);
  EXPECT_NEAR(log_marginal_likelihood(b.hyper(), data, 0), log_marginal_likelihood(a.hyper(), data, 0), 1e-6);
}

TEST(FitGp, LearnedNoiseStaysInBounds) {
  const Dataset data = random_dataset(30, 1, 23, 0.0);
  FitOptions fo;
  fo.learn_noise = true;
  Rng rng(2);
  const GPModel m = fit_gp(data, 0, rng, fo);
  EXPECT_GT(m.hyper().noise_var, 0.0);
  EXPECT_TRUE(m.hyper().valid());
}

TEST(FitGp, DegenerateDataErrors) {
  DesignSpace space(VectorXd::Zero(1), VectorXd::Ones(1));
  MatrixXd X(3, 1), Y(3, 1);
  X << 0.5, 0.5, 0.2;
  Y << 1.0, 2.0, 0.0;
  Rng rng(0);
  EXPECT_THROW(fit_gp(Dataset(space, X, Y, 0.0), 0, rng), IllConditionedError);
  MatrixXd X1(1, 1), Y1(1, 1);
  X1 << 0.5;
  Y1 << 1.0;
  EXPECT_THROW(fit_gp(Dataset(space, X1, Y1, 1e-3), 0, rng), std::invalid_argument);
}

TEST(Dataset, AppendAndValidate) {
  Dataset d;
  d.space = DesignSpace::unit_cube(2);
  d.append(VectorXd::Constant(2, 0.1), VectorXd::Constant(3, 1.0));
  d.append(VectorXd::Constant(2, 0.2), VectorXd::Constant(3, std::nan("")));
  EXPECT_EQ(d.size(), 2);
  EXPECT_EQ(d.num_objectives(), 3);
  EXPECT_EQ(d.valid_rows(), std::vector<Index>{0});
  EXPECT_THROW(d.append(VectorXd::Zero(3), VectorXd::Zero(3)), std::invalid_argument);
  d.noise_override = VectorXd::Constant(2, 1e-3);
  EXPECT_THROW(d.validate(), std::invalid_argument);
}
