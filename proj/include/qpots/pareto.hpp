#ifndef QPOTS_PARETO_HPP
#define QPOTS_PARETO_HPP

#include "qpots/types.hpp"

#include <cstdint>
#include <vector>

// All objective vectors are in the minimization orientation. Maximization
// problems are negated at the API boundary.

namespace qpots {

/// Pareto set X* (rows) with its frontier Y* (rows), one-to-one.
struct ParetoArchive {
  MatrixXd X;
  MatrixXd Y;

  [[nodiscard]] Index size() const { return Y.rows(); }
  [[nodiscard]] bool empty() const { return Y.rows() == 0; }
};

/// a <= b componentwise and a < b in at least one component.
template <typename DerivedA, typename DerivedB>
bool dominates(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dominates: length mismatch");
  bool strict = false;
  for (Index k = 0; k < a.size(); ++k) {
    if (a(k) > b(k)) return false;
    if (a(k) < b(k)) strict = true;
  }
  return strict;
}

/// Rows not dominated by any other row, ascending. Equal rows do not
/// dominate each other, so duplicates are all retained.
std::vector<Index> nondominated_filter(const Eigen::Ref<const MatrixXd>& Y);

/// Fronts in rank order; front 0 is the nondominated set.
std::vector<std::vector<Index>> fast_nondominated_sort(const Eigen::Ref<const MatrixXd>& Y);

/// NSGA-II crowding distance of a mutually nondominated set. Extremes per
/// objective get +inf; repeated objective vectors after the first get 0.
VectorXd crowding_distance(const Eigen::Ref<const MatrixXd>& Yfront);

struct HypervolumeOptions {
  Index mc_samples = 1'000'000;
  std::uint64_t mc_seed = 0x68766d63ULL;
};

struct HypervolumeResult {
  double value = 0.0;
  /// Zero for the exact K <= 3 algorithms.
  double std_error = 0.0;
  /// Points that do not dominate the reference point (or are non-finite).
  Index excluded = 0;
  bool exact = true;
};

/// Lebesgue measure of the union of boxes [y_i, ref]. Exact sweep for K = 2,
/// exact slicing for K = 3, Monte Carlo for K > 3.
HypervolumeResult hypervolume_detailed(const Eigen::Ref<const MatrixXd>& Y, const Eigen::Ref<const VectorXd>& ref,
                                       const HypervolumeOptions& options = {});

double hypervolume(const Eigen::Ref<const MatrixXd>& Y, const Eigen::Ref<const VectorXd>& ref);

/// Nondominated subset of (X, Y), rows with non-finite Y ignored and exact
/// duplicate designs collapsed to their first occurrence.
ParetoArchive pareto_archive(const Eigen::Ref<const MatrixXd>& X, const Eigen::Ref<const MatrixXd>& Y);

/// Mean distance from each reference-front row to its nearest row of Y.
double igd(const Eigen::Ref<const MatrixXd>& Y, const Eigen::Ref<const MatrixXd>& reference_front);

/// Worst observed value plus 10% of the observed range, per objective.
VectorXd default_reference_point(const Eigen::Ref<const MatrixXd>& Y);

}  // namespace qpots

#endif  // QPOTS_PARETO_HPP
