#ifndef QPOTS_ACQUISITION_HPP
#define QPOTS_ACQUISITION_HPP

#include "qpots/gp.hpp"
#include "qpots/history.hpp"
#include "qpots/nsga2.hpp"
#include "qpots/path.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace qpots {

enum class MaximinSpace { Unit, Raw };

struct AcquisitionBatch {
  MatrixXd points;  // q x d
  std::vector<Index> xstar_index;
  /// Min distance of each point to the data and earlier batch points.
  VectorXd distance;
};

/// Greedy maximin: point j maximizes its minimum distance to Xn and to the
/// j-1 points already chosen. Ties go to the lowest row of Xstar. q is
/// clamped to the number of rows. Distances use unit-cube coordinates of
/// `space` unless `metric` is Raw.
AcquisitionBatch maximin_select(const Eigen::Ref<const MatrixXd>& Xstar, const Eigen::Ref<const MatrixXd>& Xn,
                                Index q, const DesignSpace& space, MaximinSpace metric = MaximinSpace::Unit);

/// Observed-data oracle: returns the K observations for design x, the
/// `eval_index`-th oracle call of the run. May throw OracleFailureError or
/// return non-finite values to signal a failed evaluation.
using Oracle = std::function<VectorXd(const VectorXd& x, Index eval_index)>;

struct QpotsOptions {
  Index q = 1;
  EAConfig ea;
  PathOptions path;
  FitOptions fit;
  /// Full multi-start refit every this many iterations; between refits the
  /// models are re-conditioned on the new data with the last hyperparameters.
  int refit_every = 1;
  /// Multi-start count once a warm start exists; 0 keeps fit.n_starts.
  int refit_starts = 0;
  MaximinSpace maximin_space = MaximinSpace::Unit;
  /// Total evaluation budget; failures beyond 10% of it abort the run.
  Index budget = 0;
  /// Optional fixed seed for every objective's path (testing aid: identical
  /// models then yield identical paths).
  bool shared_path_seed = false;
};

/// Bayesian-optimization loop state of one run.
struct BOState {
  Dataset data;
  std::vector<std::shared_ptr<const GPModel>> models;
  std::vector<GPHyperparams> hypers;
  Index iteration = 0;
  std::uint64_t seed = 0;
  VectorXd ref_point;
  RunHistory history;

  [[nodiscard]] Index num_objectives() const { return data.num_objectives(); }
  [[nodiscard]] Index failures() const;
  /// Hypervolume of the nondominated valid observations.
  [[nodiscard]] double archive_hv() const;
  [[nodiscard]] ParetoArchive archive() const;
};

/// Seed-phase state: data from the seed design, models fitted (unless
/// `fit_models` is false, for model-free policies), history record 0 written.
BOState make_state(Dataset seed_data, std::uint64_t seed, VectorXd ref_point, const QpotsOptions& options,
                   bool fit_models = true);

/// (Re)builds state.models from state.data: refit when the iteration is a
/// refit iteration or no hyperparameters exist yet, else re-condition.
void update_models(BOState& state, const QpotsOptions& options);

/// Rebuilds models from state.hypers without fitting (checkpoint restore).
void condition_models(BOState& state, const QpotsOptions& options);

/// Inner problem: one consistent path per objective, NSGA-II on the paths.
ParetoArchive solve_inner_moo(const BOState& state, const QpotsOptions& options);

struct Proposal {
  AcquisitionBatch batch;
  Index xstar_size = 0;
  double seconds = 0.0;
};

/// Steps 1-2: sample paths, solve the inner problem, pick the q-batch.
Proposal propose_batch(const BOState& state, const QpotsOptions& options, Index q);

/// Steps 3-4: append observations (non-finite rows mark failures), update
/// the models, record the iteration.
void incorporate(BOState& state, const Proposal& proposal, const MatrixXd& Y, const QpotsOptions& options,
                 double extra_seconds = 0.0);

/// Evaluates the oracle at each row of X, starting at evaluation index
/// `first_eval`. Failed evaluations become NaN rows.
MatrixXd evaluate_oracle(const Oracle& oracle, const MatrixXd& X, Index first_eval, Index K);

/// One full iteration with an in-process oracle. `q` is clamped to the
/// remaining budget when options.budget is set.
void qpots_step(BOState& state, const QpotsOptions& options, const Oracle& oracle);

}  // namespace qpots

#endif  // QPOTS_ACQUISITION_HPP
