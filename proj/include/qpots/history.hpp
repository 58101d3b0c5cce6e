#ifndef QPOTS_HISTORY_HPP
#define QPOTS_HISTORY_HPP

#include "qpots/pareto.hpp"
#include "qpots/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace qpots {

/// One BO iteration. Iteration 0 is the seed design.
struct IterationRecord {
  Index iteration = 0;
  /// Cumulative oracle evaluations, failed ones included.
  Index evaluations = 0;
  /// Hypervolume of the nondominated observed set at the fixed reference.
  double hv = 0.0;
  MatrixXd batch_X;
  MatrixXd batch_Y;
  /// Row of each batch point within the inner-solve Pareto set (empty for
  /// policies without one).
  std::vector<Index> xstar_index;
  VectorXd maximin_distance;
  Index xstar_size = 0;
  double wallclock_s = 0.0;
};

struct RunHistory {
  Index repetition = 0;
  std::string policy;
  VectorXd ref_point;
  std::vector<IterationRecord> records;
  ParetoArchive archive;
};

/// Columns: rep,iter,evals,hv,wallclock_s.
void write_history_csv(const std::filesystem::path& path, const std::vector<RunHistory>& runs);
/// One JSON object per iteration with the full batch data.
void write_events_jsonl(const std::filesystem::path& path, const RunHistory& run);
/// Header x1..xd,y1..yK; one row per archive member.
void write_archive_csv(const std::filesystem::path& path, const ParetoArchive& archive);
/// Same layout as the archive, all observations (failed rows as nan).
void write_observations_csv(const std::filesystem::path& path, const MatrixXd& X, const MatrixXd& Y);

/// Per-iteration mean and population standard deviation of HV across runs.
/// Columns: iter,evals,hv_mean,hv_std,n_reps.
void write_summary_csv(const std::filesystem::path& path, const std::vector<RunHistory>& runs);

/// Reads an (x..., y...) CSV written by write_archive_csv; K columns are the
/// trailing ones, so the caller supplies K.
ParetoArchive read_archive_csv(const std::filesystem::path& path, Index K);

/// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace qpots

#endif  // QPOTS_HISTORY_HPP
