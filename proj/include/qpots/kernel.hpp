#ifndef QPOTS_KERNEL_HPP
#define QPOTS_KERNEL_HPP

#include "qpots/types.hpp"

#include <cmath>

namespace qpots {

/// Hyperparameters of the anisotropic Matérn-5/2 kernel plus the Gaussian
/// observation noise. Expressed in the units of the data they describe.
struct GPHyperparams {
  VectorXd lengthscales;
  double signal_var = 1.0;
  double noise_var = 0.0;

  [[nodiscard]] bool valid() const;
};

bool operator==(const GPHyperparams& a, const GPHyperparams& b);

namespace detail {
inline constexpr double kSqrt5 = 2.2360679774997896964;

/// Matérn-5/2 profile as a function of the scaled distance r.
template <typename Scalar>
Scalar matern52_profile(Scalar r, Scalar signal_var) {
  const Scalar s = Scalar(kSqrt5) * r;
  return signal_var * (Scalar(1) + s + s * s / Scalar(3)) * std::exp(-s);
}
}  // namespace detail

/// k(x, x2) = s2 (1 + sqrt5 r + 5 r^2 / 3) exp(-sqrt5 r),
/// r = || (x - x2) / lengthscales ||.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar matern52(const Eigen::MatrixBase<DerivedA>& x,
                                   const Eigen::MatrixBase<DerivedB>& x2,
                                   const GPHyperparams& hyper) {
  using Scalar = typename DerivedA::Scalar;
  if (x.size() != x2.size() || x.size() != hyper.lengthscales.size()) {
    throw std::invalid_argument("matern52: dimension mismatch");
  }
  if (!x.allFinite() || !x2.allFinite()) {
    throw std::invalid_argument("matern52: non-finite input");
  }
  const Scalar r = ((x - x2).array() / hyper.lengthscales.array().template cast<Scalar>()).matrix().norm();
  return detail::matern52_profile<Scalar>(r, Scalar(hyper.signal_var));
}

/// Cross-covariance matrix k(A_i, B_j) for row-stacked points. Lengthscales
/// are applied by pre-scaling, so the cost is one pairwise-distance pass.
MatrixXd matern52_gram(const Eigen::Ref<const MatrixXd>& A, const Eigen::Ref<const MatrixXd>& B,
                       const Eigen::Ref<const VectorXd>& lengthscales, double signal_var);

/// Symmetric Gram k(A, A); the diagonal is exactly signal_var.
MatrixXd matern52_gram(const Eigen::Ref<const MatrixXd>& A, const Eigen::Ref<const VectorXd>& lengthscales,
                       double signal_var);

}  // namespace qpots

#endif  // QPOTS_KERNEL_HPP
