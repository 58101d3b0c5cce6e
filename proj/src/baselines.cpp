#include "qpots/baselines.hpp"

#include <chrono>
#include <cmath>

namespace qpots {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

void sobol_step(BOState& state, Index q, Index budget, SobolStream& stream, const Oracle& oracle) {
  const auto t0 = std::chrono::steady_clock::now();
  if (budget > 0) q = std::min(q, budget - state.data.size());
  if (q < 1) throw std::logic_error("sobol_step: budget exhausted");
  Proposal p;
  p.batch.points.resize(q, state.data.dim());
  for (Index i = 0; i < q; ++i) p.batch.points.row(i) = sobol_next(stream, state.data.space).transpose();
  const MatrixXd Y = evaluate_oracle(oracle, p.batch.points, state.data.size(), state.num_objectives());

  for (Index i = 0; i < q; ++i) state.data.append(p.batch.points.row(i).transpose(), Y.row(i).transpose());
  if (budget > 0 && 10 * state.failures() > budget) {
    throw OracleFailureError("oracle failed on more than 10% of the budget");
  }
  ++state.iteration;
  IterationRecord rec;
  rec.iteration = state.iteration;
  rec.evaluations = state.data.size();
  rec.hv = state.archive_hv();
  rec.batch_X = p.batch.points;
  rec.batch_Y = Y;
  rec.wallclock_s = seconds_since(t0);
  state.history.records.push_back(std::move(rec));
}

double chebyshev(const Eigen::Ref<const VectorXd>& f, const Eigen::Ref<const VectorXd>& w) {
  const VectorXd wf = w.cwiseProduct(f);
  return wf.maxCoeff() + 0.05 * wf.sum();
}

VectorXd simplex_weights(Index K, Rng& rng) {
  // Normalized exponentials are uniform on the simplex (Dirichlet(1,...,1)).
  VectorXd w(K);
  for (Index k = 0; k < K; ++k) w[k] = -std::log1p(-rng.uniform());
  const double s = w.sum();
  return s > 0.0 ? VectorXd(w / s) : VectorXd::Constant(K, 1.0 / static_cast<double>(K));
}

Proposal propose_scalarized(const BOState& state, const QpotsOptions& options, Index q,
                            const std::optional<VectorXd>& forced_weights) {
  const auto t0 = std::chrono::steady_clock::now();
  const Index K = state.num_objectives();
  if (static_cast<Index>(state.models.size()) != K) throw std::logic_error("propose_scalarized: models not fitted");
  if (forced_weights && forced_weights->size() != K) throw std::invalid_argument("propose_scalarized: weight length");
  Proposal p;
  p.batch.points.resize(q, state.data.dim());
  p.batch.distance = VectorXd::Zero(q);
  for (Index j = 0; j < q; ++j) {
    Rng wrng(derive_seed(state.seed, hash_tag("weights"), state.iteration, j));
    const VectorXd w = forced_weights ? *forced_weights : simplex_weights(K, wrng);
    std::vector<SamplePath> paths;
    for (Index k = 0; k < K; ++k) {
      paths.emplace_back(state.models[static_cast<std::size_t>(k)],
                         derive_seed(state.seed, hash_tag("path"), state.iteration, j, k), options.path);
    }
    BatchObjective objective = [&](const MatrixXd& X) {
      MatrixXd F(X.rows(), K);
      for (Index k = 0; k < K; ++k) {
        const GPModel& m = *state.models[static_cast<std::size_t>(k)];
        F.col(k) = (paths[static_cast<std::size_t>(k)].values(X).array() - m.y_offset()) / m.y_scale();
      }
      MatrixXd s(X.rows(), 1);
      for (Index i = 0; i < X.rows(); ++i) s(i, 0) = chebyshev(F.row(i).transpose(), w);
      return s;
    };
    EAConfig ea = options.ea;
    ea.seed = derive_seed(state.seed, hash_tag("ea"), state.iteration, j);
    const ParetoArchive best = nsga2(objective, state.data.space, ea).front;
    if (best.empty()) throw std::runtime_error("propose_scalarized: empty inner solution");
    p.batch.points.row(j) = best.X.row(0);
    p.batch.xstar_index.push_back(0);
  }
  p.xstar_size = q;
  p.seconds = seconds_since(t0);
  return p;
}

void scalarized_ts_step(BOState& state, const QpotsOptions& options, const Oracle& oracle,
                        const std::optional<VectorXd>& forced_weights) {
  Index q = options.q;
  if (options.budget > 0) q = std::min(q, options.budget - state.data.size());
  if (q < 1) throw std::logic_error("scalarized_ts_step: budget exhausted");
  const Proposal p = propose_scalarized(state, options, q, forced_weights);
  const auto t0 = std::chrono::steady_clock::now();
  const MatrixXd Y = evaluate_oracle(oracle, p.batch.points, state.data.size(), state.num_objectives());
  incorporate(state, p, Y, options, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

}  // namespace qpots
