#include "qpots/linalg.hpp"

#include "qpots/kernel.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace qpots {

bool GPHyperparams::valid() const {
  if (lengthscales.size() == 0) return false;
  if (!lengthscales.allFinite() || (lengthscales.array() <= 0.0).any()) return false;
  return std::isfinite(signal_var) && signal_var > 0.0 && std::isfinite(noise_var) && noise_var >= 0.0;
}

bool operator==(const GPHyperparams& a, const GPHyperparams& b) {
  return a.lengthscales == b.lengthscales && a.signal_var == b.signal_var && a.noise_var == b.noise_var;
}

namespace {

MatrixXd scaled_sq_dist(const Eigen::Ref<const MatrixXd>& A, const Eigen::Ref<const MatrixXd>& B,
                        const Eigen::Ref<const VectorXd>& lengthscales) {
  const Eigen::RowVectorXd inv = lengthscales.cwiseInverse().transpose();
  const MatrixXd As = A.array().rowwise() * inv.array();
  const MatrixXd Bs = B.array().rowwise() * inv.array();
  MatrixXd D = -2.0 * As * Bs.transpose();
  D.colwise() += As.rowwise().squaredNorm();
  D.rowwise() += Bs.rowwise().squaredNorm().transpose();
  return D.cwiseMax(0.0);
}

}  // namespace

MatrixXd matern52_gram(const Eigen::Ref<const MatrixXd>& A, const Eigen::Ref<const MatrixXd>& B,
                       const Eigen::Ref<const VectorXd>& lengthscales, double signal_var) {
  if (A.cols() != lengthscales.size() || B.cols() != lengthscales.size()) {
    throw std::invalid_argument("matern52_gram: dimension mismatch");
  }
  if (!A.allFinite() || !B.allFinite()) throw std::invalid_argument("matern52_gram: non-finite input");
  const MatrixXd D = scaled_sq_dist(A, B, lengthscales);
  return D.unaryExpr([signal_var](double d2) { return detail::matern52_profile(std::sqrt(d2), signal_var); });
}

MatrixXd matern52_gram(const Eigen::Ref<const MatrixXd>& A, const Eigen::Ref<const VectorXd>& lengthscales,
                       double signal_var) {
  MatrixXd K = matern52_gram(A, A, lengthscales, signal_var);
  // Symmetrize and pin the diagonal; the expanded-norm distance is not exact.
  K = (0.5 * (K + K.transpose())).eval();
  K.diagonal().setConstant(signal_var);
  return K;
}

JitteredCholesky cholesky_with_jitter(const Eigen::Ref<const MatrixXd>& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("cholesky_with_jitter: matrix not square");
  const Index n = A.rows();
  if (n == 0) return {MatrixXd(0, 0), 0.0};
  if (!A.allFinite()) throw IllConditionedError("cholesky_with_jitter: non-finite matrix entries");

  Eigen::LLT<MatrixXd> llt(A);
  if (llt.info() == Eigen::Success && llt.matrixL().toDenseMatrix().allFinite()) {
    return {llt.matrixL(), 0.0};
  }
  double scale = A.diagonal().mean();
  if (!(scale > 0.0)) scale = std::max(A.diagonal().cwiseAbs().maxCoeff(), 1.0);
  for (double rel = 1e-10; rel <= 1e-4 * (1.0 + 1e-9); rel *= 10.0) {
    MatrixXd B = A;
    B.diagonal().array() += rel * scale;
    llt.compute(B);
    if (llt.info() == Eigen::Success) return {llt.matrixL(), rel * scale};
  }
  throw IllConditionedError("Cholesky failed after jitter escalation to 1e-4 * mean(diag)");
}

SqrtFactor exact_sqrt(const Eigen::Ref<const MatrixXd>& cov) {
  if (cov.rows() != cov.cols()) throw std::invalid_argument("exact_sqrt: matrix not square");
  const double scale = std::max(cov.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) {
    throw std::invalid_argument("exact_sqrt: matrix not symmetric");
  }
  SqrtFactor out;
  out.factor = cholesky_with_jitter(cov).L;
  out.method = SqrtMethod::ExactCholesky;
  out.inducing_count = cov.rows();
  return out;
}

NystromRoot::NystromRoot(const Eigen::Ref<const MatrixXd>& cov_mm) : m_(cov_mm.rows()) {
  if (cov_mm.rows() != cov_mm.cols()) throw std::invalid_argument("NystromRoot: Sigma_mm not square");
  try {
    chol_ = cholesky_with_jitter(cov_mm).L;
  } catch (const IllConditionedError&) {
    // Pseudo-inverse square root on the numerically nonzero spectrum.
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (cov_mm + cov_mm.transpose()));
    const VectorXd& lam = eig.eigenvalues();
    const double cutoff = std::max(lam.maxCoeff(), 0.0) * 1e-12 * static_cast<double>(m_);
    Index r = 0;
    for (Index i = 0; i < m_; ++i) r += lam[i] > cutoff ? 1 : 0;
    pinv_root_.resize(m_, r);
    Index c = 0;
    for (Index i = 0; i < m_; ++i) {
      if (lam[i] > cutoff) pinv_root_.col(c++) = eig.eigenvectors().col(i) / std::sqrt(lam[i]);
    }
    pinv_ = true;
  }
}

MatrixXd NystromRoot::apply(const Eigen::Ref<const MatrixXd>& cov_mN) const {
  if (cov_mN.rows() != m_) throw std::invalid_argument("NystromRoot::apply: Sigma_mN row count mismatch");
  if (pinv_) return cov_mN.transpose() * pinv_root_;
  // (L^{-1} Sigma_mN)^T, so that F F^T = Sigma_Nm Sigma_mm^{-1} Sigma_mN.
  return chol_.triangularView<Eigen::Lower>().solve(cov_mN).transpose();
}

SqrtFactor nystrom_sqrt(const Eigen::Ref<const MatrixXd>& cov_mN, const Eigen::Ref<const MatrixXd>& cov_mm) {
  const NystromRoot root(cov_mm);
  SqrtFactor out;
  out.factor = root.apply(cov_mN);
  out.method = SqrtMethod::Nystrom;
  out.inducing_count = cov_mm.rows();
  out.pseudo_inverse = root.pseudo_inverse();
  return out;
}

PivotedCholesky pivoted_cholesky(const Eigen::Ref<const MatrixXd>& S, double tol) {
  const Index n = S.rows();
  PivotedCholesky out;
  out.residual = S.diagonal().cwiseMax(0.0);
  out.G = MatrixXd::Zero(n, n);
  std::vector<char> chosen(static_cast<std::size_t>(n), 0);
  Index r = 0;
  while (r < n) {
    Index best = -1;
    double best_val = -1.0;
    for (Index i = 0; i < n; ++i) {
      if (!chosen[static_cast<std::size_t>(i)] && out.residual[i] > best_val) {
        best_val = out.residual[i];
        best = i;
      }
    }
    if (best < 0 || !(best_val > tol)) break;
    const double piv = std::sqrt(best_val);
    VectorXd col = S.col(best);
    if (r > 0) col.noalias() -= out.G.leftCols(r) * out.G.row(best).head(r).transpose();
    col /= piv;
    // Rows already eliminated have zero Schur complement; pin them so the
    // pivot block is exactly triangular.
    for (Index p : out.pivots) col[p] = 0.0;
    col[best] = piv;
    out.G.col(r) = col;
    chosen[static_cast<std::size_t>(best)] = 1;
    out.pivots.push_back(best);
    out.residual -= col.cwiseAbs2();
    out.residual = out.residual.cwiseMax(0.0);
    out.residual[best] = 0.0;
    ++r;
  }
  out.G.conservativeResize(n, r);
  return out;
}

double relative_frobenius_error(const Eigen::Ref<const MatrixXd>& A, const Eigen::Ref<const MatrixXd>& B) {
  const double denom = B.norm();
  return denom > 0.0 ? (A - B).norm() / denom : (A - B).norm();
}

}  // namespace qpots
