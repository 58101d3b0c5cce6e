#ifndef QPOTS_GP_HPP
#define QPOTS_GP_HPP

#include "qpots/kernel.hpp"
#include "qpots/types.hpp"

#include <optional>
#include <vector>

namespace qpots {

/// Observed designs and noisy objective values shared by all K surrogates.
/// Rows whose Y entries are non-finite mark failed oracle calls; they are
/// kept for bookkeeping and excluded from model training.
struct Dataset {
  DesignSpace space;
  MatrixXd X;  // n x d
  MatrixXd Y;  // n x K
  double noise_var = 0.0;
  /// Optional per-objective noise variances; empty means `noise_var` for all.
  VectorXd noise_override;

  Dataset() = default;
  Dataset(DesignSpace s, MatrixXd x, MatrixXd y, double noise);

  [[nodiscard]] Index size() const { return X.rows(); }
  [[nodiscard]] Index dim() const { return X.cols(); }
  [[nodiscard]] Index num_objectives() const { return Y.cols(); }
  [[nodiscard]] double noise_for(Index objective) const;

  /// Indices of rows with all-finite observations.
  [[nodiscard]] std::vector<Index> valid_rows() const;

  void append(const Eigen::Ref<const VectorXd>& x, const Eigen::Ref<const VectorXd>& y);
  void validate() const;
};

struct FitOptions {
  int n_starts = 8;
  int max_iter = 200;
  /// Stop when the projected gradient (log-parameter space) is below this.
  double grad_tol = 1e-6;
  bool learn_noise = false;
  bool standardize_outputs = true;
  /// Extra starting point (e.g. the previous iteration's optimum).
  std::optional<GPHyperparams> warm_start;
};

/// Posterior surrogate for one objective. Immutable once built.
///
/// Internally the inputs live in the unit cube of the design space and the
/// outputs are standardized to zero mean / unit variance; the zero-mean GP
/// prior applies there. `hyper()` and all query results are in the units of
/// the original data.
class GPModel {
 public:
  /// Conditions on `data` (valid rows only) with fixed hyperparameters.
  static GPModel condition(const Dataset& data, Index objective, const GPHyperparams& hyper,
                           bool standardize_outputs = true);

  [[nodiscard]] const GPHyperparams& hyper() const { return hyper_; }
  [[nodiscard]] const DesignSpace& space() const { return space_; }
  [[nodiscard]] Index num_train() const { return unit_X_.rows(); }
  [[nodiscard]] Index dim() const { return unit_X_.cols(); }
  [[nodiscard]] const MatrixXd& train_X() const { return train_X_; }
  [[nodiscard]] const VectorXd& train_y() const { return train_y_; }

  // Standardized-space representation.
  [[nodiscard]] const MatrixXd& unit_X() const { return unit_X_; }
  [[nodiscard]] const VectorXd& std_y() const { return std_y_; }
  [[nodiscard]] const VectorXd& unit_lengthscales() const { return unit_ls_; }
  [[nodiscard]] double std_signal_var() const { return std_signal_; }
  [[nodiscard]] double std_noise_var() const { return std_noise_; }
  /// Lower Cholesky factor of K_n + tau^2 I (standardized units, jitter included).
  [[nodiscard]] const MatrixXd& chol() const { return chol_; }
  /// [K_n + tau^2 I]^{-1} y_n in standardized units.
  [[nodiscard]] const VectorXd& alpha() const { return alpha_; }
  [[nodiscard]] double jitter() const { return jitter_; }
  [[nodiscard]] double y_offset() const { return y_mean_; }
  [[nodiscard]] double y_scale() const { return y_scale_; }

  /// Kernel between standardized-space points.
  [[nodiscard]] MatrixXd unit_kernel(const Eigen::Ref<const MatrixXd>& A, const Eigen::Ref<const MatrixXd>& B) const;
  [[nodiscard]] MatrixXd to_unit(const Eigen::Ref<const MatrixXd>& Xq) const { return space_.to_unit(Xq); }

 private:
  GPModel() = default;

  GPHyperparams hyper_;
  DesignSpace space_;
  MatrixXd train_X_;
  VectorXd train_y_;
  MatrixXd unit_X_;
  VectorXd std_y_;
  VectorXd unit_ls_;
  double std_signal_ = 1.0;
  double std_noise_ = 0.0;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  double jitter_ = 0.0;
  MatrixXd chol_;
  VectorXd alpha_;
};

struct Posterior {
  VectorXd mean;
  MatrixXd cov;
};

/// Joint posterior mean and covariance at the rows of Xq. Negative variances
/// from round-off are clamped to zero.
Posterior posterior(const GPModel& model, const Eigen::Ref<const MatrixXd>& Xq);

/// Marginal mean and variance only; O(N n^2) instead of O(N^2 n).
Posterior posterior_marginals(const GPModel& model, const Eigen::Ref<const MatrixXd>& Xq);

struct LmlResult {
  double value = 0.0;
  /// d/d log(lengthscale_i) for i < d, then d/d log(signal_var), d/d log(noise_var).
  VectorXd grad_log;
};

/// Zero-mean GP evidence log p(y | X, hyper) with analytic gradient.
LmlResult log_marginal_likelihood_with_gradient(const GPHyperparams& hyper, const Eigen::Ref<const MatrixXd>& X,
                                                const Eigen::Ref<const VectorXd>& y);

/// Zero-mean GP evidence of objective `objective_index` of `data`
/// (valid rows, original units).
double log_marginal_likelihood(const GPHyperparams& hyper, const Dataset& data, Index objective_index);

/// Fits hyperparameters by multi-start quasi-Newton ascent of the log
/// marginal likelihood (standardized space), then conditions the model.
GPModel fit_gp(const Dataset& data, Index objective_index, Rng& rng, const FitOptions& options = {});

}  // namespace qpots

#endif  // QPOTS_GP_HPP
