#ifndef QPOTS_PATH_HPP
#define QPOTS_PATH_HPP

#include "qpots/gp.hpp"
#include "qpots/linalg.hpp"

#include <memory>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace qpots {

class PathCacheOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class PathMode {
  /// One realization omega shared by every query of the path.
  Consistent,
  /// Every call is an independent joint draw (no cross-call consistency).
  PerGeneration,
};

enum class NystromPolicy { Auto, On, Off };

struct PathOptions {
  PathMode mode = PathMode::Consistent;
  NystromPolicy nystrom = NystromPolicy::Auto;
  /// Under Auto, batches with more new points than this use Nyström.
  Index nystrom_threshold = 256;
  /// New points whose conditional variance (relative to the standardized
  /// signal variance) stays below this after pivoting are drawn from their
  /// marginal residual instead of joining the conditioning set.
  double residual_tol = 1e-8;
  Index max_cache = 50'000;
  /// Inducing designs (original units) for the Nyström branch. Defaults to
  /// the model's training designs.
  std::optional<MatrixXd> inducing;
};

/// One posterior sample path Y(., omega) of a fitted GP.
///
/// Every realized (point, value) pair is cached; a re-query of a cached point
/// returns the stored value bit-exactly, and new points are drawn from the
/// posterior conditioned on the training data and on earlier realized
/// values (reparameterization: mean + square-root factor times N(0, I)).
class SamplePath {
 public:
  SamplePath(std::shared_ptr<const GPModel> model, std::uint64_t seed, PathOptions options = {});

  /// Path values at the rows of Xq (original units).
  VectorXd values(const Eigen::Ref<const MatrixXd>& Xq);

  [[nodiscard]] const GPModel& model() const { return *model_; }
  [[nodiscard]] Index cache_size() const { return static_cast<Index>(cached_vals_.size()); }
  /// Training points plus realized points kept in the joint factor.
  [[nodiscard]] Index conditioning_size() const { return size_; }
  [[nodiscard]] bool nystrom_active() const { return nystrom_.has_value(); }
  [[nodiscard]] bool nystrom_pseudo_inverse() const { return nystrom_ && nystrom_->root.pseudo_inverse(); }
  [[nodiscard]] MatrixXd cached_X() const;
  [[nodiscard]] VectorXd cached_vals() const;

 private:
  struct KeyHash {
    std::size_t operator()(const std::vector<double>& k) const noexcept;
  };
  struct NystromState {
    MatrixXd Z;    // inducing points, unit coordinates
    MatrixXd W_Z;  // L^{-1} K(cond, Z)
    NystromRoot root;
    VectorXd z;
  };

  VectorXd draw_standardized(const MatrixXd& U);
  VectorXd draw_exact(const MatrixXd& U);
  VectorXd draw_nystrom(const MatrixXd& U);
  void reserve(Index capacity);

  std::shared_ptr<const GPModel> model_;
  PathOptions options_;
  Rng rng_;
  std::uint64_t seed_;
  Index calls_ = 0;

  // Joint factor over [training; realized pivots] in standardized space.
  MatrixXd cond_X_;
  MatrixXd L_;
  VectorXd u_;
  Index size_ = 0;
  std::optional<NystromState> nystrom_;

  std::unordered_map<std::vector<double>, Index, KeyHash> index_;
  std::vector<std::vector<double>> cached_X_;
  std::vector<double> cached_vals_;
};

/// Free-function form of SamplePath::values.
VectorXd path_values(SamplePath& path, const Eigen::Ref<const MatrixXd>& Xq);

/// Rows of the valid observations of `data` that are nondominated
/// (minimization). Never empty for nonempty data.
std::vector<Index> select_inducing(const Dataset& data);

}  // namespace qpots

#endif  // QPOTS_PATH_HPP
