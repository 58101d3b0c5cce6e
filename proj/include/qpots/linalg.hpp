#ifndef QPOTS_LINALG_HPP
#define QPOTS_LINALG_HPP

#include "qpots/types.hpp"

#include <vector>

namespace qpots {

/// Lower Cholesky factor with the bounded jitter escalation: on failure,
/// 1e-10 * mean(diag) is added and multiplied by 10 up to 1e-4 * mean(diag).
/// Throws IllConditionedError once the budget is exhausted.
struct JitteredCholesky {
  MatrixXd L;
  double jitter = 0.0;
};

JitteredCholesky cholesky_with_jitter(const Eigen::Ref<const MatrixXd>& A);

enum class SqrtMethod { ExactCholesky, Nystrom };

/// F with F F^T ~ Sigma.
struct SqrtFactor {
  MatrixXd factor;
  SqrtMethod method = SqrtMethod::ExactCholesky;
  Index inducing_count = 0;
  /// Set when the inducing block needed the pseudo-inverse fallback.
  bool pseudo_inverse = false;
};

/// Jittered Cholesky square root of a symmetric PSD matrix.
SqrtFactor exact_sqrt(const Eigen::Ref<const MatrixXd>& cov);

/// Inverse square root of the inducing block, reusable across many
/// cross-covariance blocks sharing the same inducing set.
class NystromRoot {
 public:
  explicit NystromRoot(const Eigen::Ref<const MatrixXd>& cov_mm);

  /// Returns (Sigma_mN)^T R with R R^T = Sigma_mm^{-1}; shape N x m.
  [[nodiscard]] MatrixXd apply(const Eigen::Ref<const MatrixXd>& cov_mN) const;

  [[nodiscard]] Index size() const { return m_; }
  [[nodiscard]] bool pseudo_inverse() const { return pinv_; }

 private:
  Index m_ = 0;
  bool pinv_ = false;
  MatrixXd chol_;     // lower factor of Sigma_mm (+ jitter)
  MatrixXd pinv_root_;  // m x r, used when the Cholesky path failed
};

/// Nyström square root Sigma_NN^{1/2} ~ Sigma_mN^T Sigma_mm^{-1/2}.
/// Cost O(m^3 + N m^2).
SqrtFactor nystrom_sqrt(const Eigen::Ref<const MatrixXd>& cov_mN, const Eigen::Ref<const MatrixXd>& cov_mm);

/// Greedy diagonal-pivoted Cholesky, stopping once every residual diagonal
/// entry is below `tol`. G is N x r with G G^T ~ S; pivots are listed in
/// selection order, and G restricted to those rows is lower triangular.
struct PivotedCholesky {
  MatrixXd G;
  std::vector<Index> pivots;
  VectorXd residual;  // remaining diagonal, clamped at 0
};

PivotedCholesky pivoted_cholesky(const Eigen::Ref<const MatrixXd>& S, double tol);

/// ||A - B||_F / ||B||_F.
double relative_frobenius_error(const Eigen::Ref<const MatrixXd>& A, const Eigen::Ref<const MatrixXd>& B);

}  // namespace qpots

#endif  // QPOTS_LINALG_HPP
