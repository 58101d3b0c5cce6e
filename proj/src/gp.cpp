#include "qpots/gp.hpp"

#include "qpots/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

namespace qpots {

Dataset::Dataset(DesignSpace s, MatrixXd x, MatrixXd y, double noise)
    : space(std::move(s)), X(std::move(x)), Y(std::move(y)), noise_var(noise) {
  validate();
}

double Dataset::noise_for(Index objective) const {
  if (noise_override.size() > 0) return noise_override[objective];
  return noise_var;
}

std::vector<Index> Dataset::valid_rows() const {
  std::vector<Index> rows;
  rows.reserve(static_cast<std::size_t>(Y.rows()));
  for (Index i = 0; i < Y.rows(); ++i) {
    if (Y.row(i).allFinite()) rows.push_back(i);
  }
  return rows;
}

void Dataset::append(const Eigen::Ref<const VectorXd>& x, const Eigen::Ref<const VectorXd>& y) {
  if (X.rows() == 0 && X.cols() == 0) X.resize(0, x.size());
  if (Y.rows() == 0 && Y.cols() == 0) Y.resize(0, y.size());
  if (x.size() != X.cols() || y.size() != Y.cols()) throw std::invalid_argument("Dataset::append: size mismatch");
  X.conservativeResize(X.rows() + 1, Eigen::NoChange);
  Y.conservativeResize(Y.rows() + 1, Eigen::NoChange);
  X.row(X.rows() - 1) = x.transpose();
  Y.row(Y.rows() - 1) = y.transpose();
}

void Dataset::validate() const {
  if (X.rows() != Y.rows()) throw std::invalid_argument("Dataset: X and Y row counts differ");
  if (X.rows() > 0 && X.cols() != space.dim()) throw std::invalid_argument("Dataset: X width differs from space dim");
  if (!X.allFinite()) throw std::invalid_argument("Dataset: non-finite design entries");
  if (!(noise_var >= 0.0) || !std::isfinite(noise_var)) throw std::invalid_argument("Dataset: noise_var must be >= 0");
  if (noise_override.size() > 0 && noise_override.size() != Y.cols()) {
    throw std::invalid_argument("Dataset: noise_override length must equal the objective count");
  }
}

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

struct Standardized {
  MatrixXd unit_X;
  VectorXd y;
  MatrixXd train_X;
  VectorXd train_y;
  double mean = 0.0;
  double scale = 1.0;
};

Standardized standardize(const Dataset& data, Index objective, bool standardize_outputs) {
  data.validate();
  if (objective < 0 || objective >= data.num_objectives()) throw std::invalid_argument("objective index out of range");
  const auto rows = data.valid_rows();
  Standardized s;
  s.train_X.resize(static_cast<Index>(rows.size()), data.dim());
  s.train_y.resize(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    s.train_X.row(static_cast<Index>(i)) = data.X.row(rows[i]);
    s.train_y[static_cast<Index>(i)] = data.Y(rows[i], objective);
  }
  s.unit_X = data.space.to_unit(s.train_X);
  if (standardize_outputs && s.train_y.size() > 0) {
    s.mean = s.train_y.mean();
    const double var = (s.train_y.array() - s.mean).square().mean();
    const double sd = std::sqrt(var);
    s.scale = sd > 1e-12 * std::max(1.0, std::abs(s.mean)) ? sd : 1.0;
  }
  s.y = (s.train_y.array() - s.mean) / s.scale;
  return s;
}

bool has_duplicate_rows(const MatrixXd& X) {
  std::set<std::vector<double>> seen;
  for (Index i = 0; i < X.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(X.cols()));
    for (Index j = 0; j < X.cols(); ++j) row[static_cast<std::size_t>(j)] = X(i, j);
    if (!seen.insert(std::move(row)).second) return true;
  }
  return false;
}

}  // namespace

MatrixXd GPModel::unit_kernel(const Eigen::Ref<const MatrixXd>& A, const Eigen::Ref<const MatrixXd>& B) const {
  return matern52_gram(A, B, unit_ls_, std_signal_);
}

GPModel GPModel::condition(const Dataset& data, Index objective, const GPHyperparams& hyper,
                           bool standardize_outputs) {
  if (!hyper.valid()) throw std::invalid_argument("GPModel::condition: invalid hyperparameters");
  if (hyper.lengthscales.size() != data.dim()) throw std::invalid_argument("GPModel::condition: lengthscale count");
  Standardized s = standardize(data, objective, standardize_outputs);
  if (s.y.size() == 0) throw std::invalid_argument("GPModel::condition: no valid observations");

  GPModel m;
  m.hyper_ = hyper;
  m.space_ = data.space;
  m.train_X_ = std::move(s.train_X);
  m.train_y_ = std::move(s.train_y);
  m.unit_X_ = std::move(s.unit_X);
  m.std_y_ = std::move(s.y);
  m.y_mean_ = s.mean;
  m.y_scale_ = s.scale;
  m.unit_ls_ = hyper.lengthscales.cwiseQuotient(data.space.width());
  const double s2 = s.scale * s.scale;
  m.std_signal_ = hyper.signal_var / s2;
  m.std_noise_ = hyper.noise_var / s2;

  MatrixXd K = matern52_gram(m.unit_X_, m.unit_ls_, m.std_signal_);
  K.diagonal().array() += m.std_noise_;
  auto jc = cholesky_with_jitter(K);
  m.chol_ = std::move(jc.L);
  m.jitter_ = jc.jitter;
  const auto L = m.chol_.triangularView<Eigen::Lower>();
  m.alpha_ = m.chol_.transpose().triangularView<Eigen::Upper>().solve(L.solve(m.std_y_));
  return m;
}

Posterior posterior(const GPModel& model, const Eigen::Ref<const MatrixXd>& Xq) {
  if (Xq.cols() != model.dim()) throw std::invalid_argument("posterior: query dimension mismatch");
  const MatrixXd U = model.to_unit(Xq);
  const MatrixXd Kqn = model.unit_kernel(U, model.unit_X());
  const MatrixXd V = model.chol().triangularView<Eigen::Lower>().solve(Kqn.transpose());
  Posterior out;
  out.mean = (Kqn * model.alpha()).array() * model.y_scale() + model.y_offset();
  MatrixXd cov = matern52_gram(U, model.unit_lengthscales(), model.std_signal_var());
  cov.noalias() -= V.transpose() * V;
  cov = (0.5 * (cov + cov.transpose())).eval();
  cov.diagonal() = cov.diagonal().cwiseMax(0.0);
  out.cov = cov * (model.y_scale() * model.y_scale());
  return out;
}

Posterior posterior_marginals(const GPModel& model, const Eigen::Ref<const MatrixXd>& Xq) {
  if (Xq.cols() != model.dim()) throw std::invalid_argument("posterior_marginals: query dimension mismatch");
  const MatrixXd U = model.to_unit(Xq);
  const MatrixXd Kqn = model.unit_kernel(U, model.unit_X());
  const MatrixXd V = model.chol().triangularView<Eigen::Lower>().solve(Kqn.transpose());
  Posterior out;
  out.mean = (Kqn * model.alpha()).array() * model.y_scale() + model.y_offset();
  VectorXd var = (model.std_signal_var() - V.colwise().squaredNorm().transpose().array()).cwiseMax(0.0);
  out.cov = (var * (model.y_scale() * model.y_scale())).asDiagonal();
  return out;
}

LmlResult log_marginal_likelihood_with_gradient(const GPHyperparams& hyper, const Eigen::Ref<const MatrixXd>& X,
                                                const Eigen::Ref<const VectorXd>& y) {
  if (!hyper.valid()) throw std::invalid_argument("log_marginal_likelihood: invalid hyperparameters");
  if (X.rows() != y.size() || X.cols() != hyper.lengthscales.size()) {
    throw std::invalid_argument("log_marginal_likelihood: dimension mismatch");
  }
  const Index n = X.rows();
  const Index d = X.cols();
  const Eigen::RowVectorXd inv = hyper.lengthscales.cwiseInverse().transpose();
  const MatrixXd Xs = X.array().rowwise() * inv.array();

  // Pairwise scaled distances once; kernel and its radial derivative from them.
  MatrixXd D2 = -2.0 * Xs * Xs.transpose();
  D2.colwise() += Xs.rowwise().squaredNorm();
  D2.rowwise() += Xs.rowwise().squaredNorm().transpose();
  D2 = D2.cwiseMax(0.0);
  D2.diagonal().setZero();
  const MatrixXd R = D2.cwiseSqrt();
  const double s2 = hyper.signal_var;
  const MatrixXd E = (-detail::kSqrt5 * R).array().exp();
  MatrixXd Kf = s2 * (1.0 + detail::kSqrt5 * R.array() + (5.0 / 3.0) * D2.array()) * E.array();
  Kf = (0.5 * (Kf + Kf.transpose())).eval();

  MatrixXd K = Kf;
  K.diagonal().array() += hyper.noise_var;
  const auto jc = cholesky_with_jitter(K);
  const auto L = jc.L.triangularView<Eigen::Lower>();
  const VectorXd alpha = jc.L.transpose().triangularView<Eigen::Upper>().solve(L.solve(y));

  LmlResult out;
  out.value = -0.5 * y.dot(alpha) - jc.L.diagonal().array().log().sum() - 0.5 * static_cast<double>(n) * kLog2Pi;

  // K^-1 = L^-T L^-1 as a symmetric rank update.
  MatrixXd Linv = L.solve(MatrixXd::Identity(n, n));
  MatrixXd Kinv = MatrixXd::Zero(n, n);
  Kinv.selfadjointView<Eigen::Lower>().rankUpdate(Linv.transpose());
  Kinv.triangularView<Eigen::StrictlyUpper>() = Kinv.transpose();
  const MatrixXd W = alpha * alpha.transpose() - Kinv;

  out.grad_log.resize(d + 2);
  // d k / d log l_i = s2 (5/3) (1 + sqrt5 r) exp(-sqrt5 r) (dx_i / l_i)^2
  const MatrixXd M =
      (W.array() * (s2 * (5.0 / 3.0) * (1.0 + detail::kSqrt5 * R.array()) * E.array())).matrix();
  const VectorXd rowsum = M.rowwise().sum();
  const MatrixXd MX = M * Xs;
  for (Index i = 0; i < d; ++i) {
    const auto xi = Xs.col(i);
    // sum_ab M_ab (x_ai - x_bi)^2 = 2 (rowsum . x_i^2 - x_i^T M x_i)
    out.grad_log[i] = 0.5 * 2.0 * (rowsum.dot(xi.cwiseAbs2()) - xi.dot(MX.col(i)));
  }
  out.grad_log[d] = 0.5 * (W.array() * Kf.array()).sum();
  out.grad_log[d + 1] = 0.5 * hyper.noise_var * W.trace();
  return out;
}

double log_marginal_likelihood(const GPHyperparams& hyper, const Dataset& data, Index objective_index) {
  const Standardized s = standardize(data, objective_index, false);
  return log_marginal_likelihood_with_gradient(hyper, s.train_X, s.train_y).value;
}

namespace {

constexpr double kRelDecreaseTol = 1e7 * std::numeric_limits<double>::epsilon();

struct Box {
  VectorXd lo;
  VectorXd hi;
};

/// Projected BFGS minimization of f over a box in log-parameter space.
template <typename Fn>
VectorXd minimize_box(Fn&& f, VectorXd x, const Box& box, int max_iter, double grad_tol, double& f_out) {
  const Index p = x.size();
  x = x.cwiseMax(box.lo).cwiseMin(box.hi);
  VectorXd g;
  double fx = f(x, g);
  if (!std::isfinite(fx)) {
    f_out = fx;
    return x;
  }
  MatrixXd H = MatrixXd::Identity(p, p);
  auto project = [&](const VectorXd& xv, const VectorXd& gv) {
    VectorXd pg = gv;
    for (Index i = 0; i < p; ++i) {
      if ((xv[i] <= box.lo[i] && gv[i] > 0.0) || (xv[i] >= box.hi[i] && gv[i] < 0.0)) pg[i] = 0.0;
    }
    return pg;
  };
  for (int it = 0; it < max_iter; ++it) {
    const VectorXd pg = project(x, g);
    if (pg.lpNorm<Eigen::Infinity>() < grad_tol) break;
    // Bound-active coordinates are decoupled from the quasi-Newton model.
    for (Index i = 0; i < p; ++i) {
      if (pg[i] != 0.0) continue;
      H.row(i).setZero();
      H.col(i).setZero();
      H(i, i) = 1.0;
    }
    VectorXd dir = -(H * pg);
    if (dir.dot(pg) >= 0.0) {
      H.setIdentity();
      dir = -pg;
    }
    const double max_step = dir.lpNorm<Eigen::Infinity>();
    double t = max_step > 2.0 ? 2.0 / max_step : 1.0;
    bool accepted = false;
    VectorXd x_new, g_new;
    double f_new = 0.0;
    for (int ls = 0; ls < 40; ++ls) {
      x_new = (x + t * dir).cwiseMax(box.lo).cwiseMin(box.hi);
      f_new = f(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= fx + 1e-4 * g.dot(x_new - x)) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    const VectorXd s = x_new - x;
    const VectorXd yv = g_new - g;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      const double rho = 1.0 / sy;
      const MatrixXd I = MatrixXd::Identity(p, p);
      H = (I - rho * s * yv.transpose()) * H * (I - rho * yv * s.transpose()) + rho * s * s.transpose();
    }
    // Relative decrease test as in L-BFGS-B (factr 1e7).
    const bool stalled = s.lpNorm<Eigen::Infinity>() < 1e-12 ||
                         fx - f_new <= kRelDecreaseTol * std::max({std::abs(fx), std::abs(f_new), 1.0});
    x = x_new;
    g = g_new;
    fx = f_new;
    if (stalled) break;
  }
  f_out = fx;
  return x;
}

}  // namespace

GPModel fit_gp(const Dataset& data, Index objective_index, Rng& rng, const FitOptions& options) {
  const Standardized s = standardize(data, objective_index, options.standardize_outputs);
  const Index n = s.y.size();
  const Index d = data.dim();
  if (n < 2) throw std::invalid_argument("fit_gp: need at least 2 valid observations");
  const double noise = data.noise_for(objective_index);
  if (noise == 0.0 && !options.learn_noise && has_duplicate_rows(s.train_X)) {
    throw IllConditionedError("fit_gp: duplicate design rows with zero observation noise");
  }
  {
    bool distinct = false;
    for (Index i = 1; i < n && !distinct; ++i) distinct = s.train_X.row(i) != s.train_X.row(0);
    if (!distinct) throw std::invalid_argument("fit_gp: need at least 2 distinct design rows");
  }

  const double s2 = s.scale * s.scale;
  const double std_noise = noise / s2;
  const bool learn = options.learn_noise;
  const Index p = d + 1 + (learn ? 1 : 0);

  Box box{VectorXd(p), VectorXd(p)};
  box.lo.head(d).setConstant(std::log(1e-2));
  box.hi.head(d).setConstant(std::log(1e2));
  box.lo[d] = std::log(1e-6);
  box.hi[d] = std::log(1e3);
  if (learn) {
    box.lo[d + 1] = std::log(1e-8);
    box.hi[d + 1] = std::log(1.0);
  }

  auto unpack = [&](const VectorXd& theta) {
    GPHyperparams h;
    h.lengthscales = theta.head(d).array().exp();
    h.signal_var = std::exp(theta[d]);
    h.noise_var = learn ? std::exp(theta[d + 1]) : std_noise;
    return h;
  };
  auto objective = [&](const VectorXd& theta, VectorXd& grad) -> double {
    try {
      const LmlResult r = log_marginal_likelihood_with_gradient(unpack(theta), s.unit_X, s.y);
      grad = -r.grad_log.head(p);
      if (!std::isfinite(r.value) || !grad.allFinite()) return std::numeric_limits<double>::infinity();
      return -r.value;
    } catch (const IllConditionedError&) {
      grad = VectorXd::Zero(p);
      return std::numeric_limits<double>::infinity();
    }
  };

  std::vector<VectorXd> starts;
  {
    VectorXd t0(p);
    t0.head(d).setConstant(std::log(0.5));
    t0[d] = 0.0;  // var of standardized y
    if (learn) t0[d + 1] = std::log(std::max(std_noise, 1e-4));
    starts.push_back(t0);
  }
  if (options.warm_start) {
    const GPHyperparams& w = *options.warm_start;
    if (w.valid() && w.lengthscales.size() == d) {
      VectorXd tw(p);
      tw.head(d) = w.lengthscales.cwiseQuotient(data.space.width()).array().log();
      tw[d] = std::log(w.signal_var / s2);
      if (learn) tw[d + 1] = std::log(std::max(w.noise_var / s2, 1e-8));
      starts.push_back(tw);
    }
  }
  for (int k = 1; k < options.n_starts; ++k) {
    VectorXd t(p);
    for (Index i = 0; i < d; ++i) t[i] = rng.uniform(std::log(0.05), std::log(5.0));
    t[d] = rng.uniform(std::log(0.2), std::log(5.0));
    if (learn) t[d + 1] = rng.uniform(std::log(1e-6), std::log(1e-1));
    starts.push_back(t);
  }

  VectorXd best;
  double best_f = std::numeric_limits<double>::infinity();
  for (const VectorXd& t : starts) {
    double f = 0.0;
    VectorXd x = minimize_box(objective, t, box, options.max_iter, options.grad_tol, f);
    if (f < best_f) {
      best_f = f;
      best = x;
    }
  }
  if (!std::isfinite(best_f)) throw IllConditionedError("fit_gp: marginal likelihood not finite at any start");

  const GPHyperparams hs = unpack(best);
  GPHyperparams h;
  h.lengthscales = hs.lengthscales.cwiseProduct(data.space.width());
  h.signal_var = hs.signal_var * s2;
  h.noise_var = learn ? hs.noise_var * s2 : noise;
  return GPModel::condition(data, objective_index, h, options.standardize_outputs);
}

}  // namespace qpots
