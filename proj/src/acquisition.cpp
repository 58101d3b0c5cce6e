#include "qpots/acquisition.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace qpots {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

MatrixXd valid_X(const Dataset& data) {
  const auto rows = data.valid_rows();
  MatrixXd X(static_cast<Index>(rows.size()), data.dim());
  for (std::size_t i = 0; i < rows.size(); ++i) X.row(static_cast<Index>(i)) = data.X.row(rows[i]);
  return X;
}

MatrixXd rows_of(const MatrixXd& M, const std::vector<Index>& rows) {
  MatrixXd out(static_cast<Index>(rows.size()), M.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = M.row(rows[i]);
  return out;
}

}  // namespace

AcquisitionBatch maximin_select(const Eigen::Ref<const MatrixXd>& Xstar, const Eigen::Ref<const MatrixXd>& Xn,
                                Index q, const DesignSpace& space, MaximinSpace metric) {
  const Index N = Xstar.rows();
  if (N == 0) throw std::invalid_argument("maximin_select: empty candidate set");
  if (q < 1) throw std::invalid_argument("maximin_select: q must be >= 1");
  if (Xstar.cols() != space.dim() || (Xn.rows() > 0 && Xn.cols() != space.dim())) {
    throw std::invalid_argument("maximin_select: dimension mismatch");
  }
  q = std::min(q, N);
  const bool unit = metric == MaximinSpace::Unit;
  const MatrixXd C = unit ? space.to_unit(Xstar) : MatrixXd(Xstar);
  const MatrixXd D = unit ? space.to_unit(Xn) : MatrixXd(Xn);

  // Points as contiguous columns; best[i] is the squared distance of
  // candidate i to everything chosen so far (the data, then the batch).
  // Taken candidates are marked with -1 so they are never picked again.
  const MatrixXd Ct = C.transpose();
  const Index d = Ct.rows();
  auto sqdist = [&](Index i, const double* p) {
    double acc = 0.0;
    const double* c = Ct.col(i).data();
    for (Index k = 0; k < d; ++k) acc += (c[k] - p[k]) * (c[k] - p[k]);
    return acc;
  };
  VectorXd best = VectorXd::Constant(N, std::numeric_limits<double>::infinity());
  const MatrixXd Dt = D.transpose();
  for (Index j = 0; j < Dt.cols(); ++j) {
    const double* p = Dt.col(j).data();
    for (Index i = 0; i < N; ++i) best[i] = std::min(best[i], sqdist(i, p));
  }
  Index arg = 0;
  for (Index i = 1; i < N; ++i) {
    if (best[i] > best[arg]) arg = i;
  }

  AcquisitionBatch out;
  out.points.resize(q, Xstar.cols());
  out.distance.resize(q);
  for (Index s = 0; s < q; ++s) {
    out.xstar_index.push_back(arg);
    out.points.row(s) = Xstar.row(arg);
    out.distance[s] = std::sqrt(best[arg]);
    best[arg] = -1.0;
    if (s + 1 == q) break;
    // Update the distances and find the next argmax (lowest row on ties) in
    // one pass.
    const double* p = Ct.col(arg).data();
    Index next = -1;
    for (Index i = 0; i < N; ++i) {
      if (best[i] >= 0.0) best[i] = std::min(best[i], sqdist(i, p));
      if (next < 0 || best[i] > best[next]) next = i;
    }
    arg = next;
  }
  return out;
}

Index BOState::failures() const { return data.size() - static_cast<Index>(data.valid_rows().size()); }

ParetoArchive BOState::archive() const { return pareto_archive(data.X, data.Y); }

double BOState::archive_hv() const {
  const ParetoArchive a = archive();
  if (a.empty()) return 0.0;
  return hypervolume(a.Y, ref_point);
}

void condition_models(BOState& state, const QpotsOptions& options) {
  const Index K = state.num_objectives();
  if (static_cast<Index>(state.hypers.size()) != K) throw std::invalid_argument("condition_models: missing hyperparameters");
  state.models.clear();
  for (Index k = 0; k < K; ++k) {
    state.models.push_back(std::make_shared<const GPModel>(
        GPModel::condition(state.data, k, state.hypers[static_cast<std::size_t>(k)], options.fit.standardize_outputs)));
  }
}

void update_models(BOState& state, const QpotsOptions& options) {
  const Index K = state.num_objectives();
  const bool refit = state.hypers.size() != static_cast<std::size_t>(K) || options.refit_every <= 1 ||
                     state.iteration % options.refit_every == 0;
  if (!refit) {
    condition_models(state, options);
    return;
  }
  std::vector<GPHyperparams> hypers;
  std::vector<std::shared_ptr<const GPModel>> models;
  for (Index k = 0; k < K; ++k) {
    FitOptions fo = options.fit;
    if (state.hypers.size() == static_cast<std::size_t>(K)) {
      fo.warm_start = state.hypers[static_cast<std::size_t>(k)];
      if (options.refit_starts > 0) fo.n_starts = options.refit_starts;
    }
    Rng rng(derive_seed(state.seed, hash_tag("fit"), state.iteration, k));
    auto model = std::make_shared<const GPModel>(fit_gp(state.data, k, rng, fo));
    hypers.push_back(model->hyper());
    models.push_back(std::move(model));
  }
  state.hypers = std::move(hypers);
  state.models = std::move(models);
}

BOState make_state(Dataset seed_data, std::uint64_t seed, VectorXd ref_point, const QpotsOptions& options,
                   bool fit_models) {
  const auto t0 = std::chrono::steady_clock::now();
  BOState state;
  state.data = std::move(seed_data);
  state.seed = seed;
  state.ref_point = std::move(ref_point);
  if (state.ref_point.size() != state.num_objectives()) throw std::invalid_argument("make_state: reference point length");
  state.history.ref_point = state.ref_point;
  if (fit_models) update_models(state, options);
  IterationRecord rec;
  rec.iteration = 0;
  rec.evaluations = state.data.size();
  rec.hv = state.archive_hv();
  rec.batch_X = state.data.X;
  rec.batch_Y = state.data.Y;
  rec.wallclock_s = seconds_since(t0);
  state.history.records.push_back(std::move(rec));
  return state;
}

ParetoArchive solve_inner_moo(const BOState& state, const QpotsOptions& options) {
  const Index K = state.num_objectives();
  if (static_cast<Index>(state.models.size()) != K) throw std::logic_error("solve_inner_moo: models not fitted");

  PathOptions popts = options.path;
  const auto nd = select_inducing(state.data);
  const MatrixXd Xv = valid_X(state.data);
  if (!popts.inducing) popts.inducing = nd.size() >= 2 ? rows_of(state.data.X, nd) : Xv;

  std::vector<SamplePath> paths;
  paths.reserve(static_cast<std::size_t>(K));
  for (Index k = 0; k < K; ++k) {
    const Index tag = options.shared_path_seed ? 0 : k;
    paths.emplace_back(state.models[static_cast<std::size_t>(k)],
                       derive_seed(state.seed, hash_tag("path"), state.iteration, tag), popts);
  }
  BatchObjective objective = [&paths, K](const MatrixXd& X) {
    MatrixXd Y(X.rows(), K);
    for (Index k = 0; k < K; ++k) Y.col(k) = paths[static_cast<std::size_t>(k)].values(X);
    return Y;
  };
  EAConfig ea = options.ea;
  ea.seed = derive_seed(state.seed, hash_tag("ea"), state.iteration);
  const MatrixXd incumbents = rows_of(state.data.X, nd);
  ParetoArchive front = nsga2(objective, state.data.space, ea, incumbents).front;
  if (front.empty()) throw std::runtime_error("solve_inner_moo: inner solver returned an empty Pareto set");
  return front;
}

Proposal propose_batch(const BOState& state, const QpotsOptions& options, Index q) {
  const auto t0 = std::chrono::steady_clock::now();
  const ParetoArchive front = solve_inner_moo(state, options);
  Proposal p;
  p.xstar_size = front.size();
  p.batch = maximin_select(front.X, state.data.X, q, state.data.space, options.maximin_space);
  p.seconds = seconds_since(t0);
  return p;
}

MatrixXd evaluate_oracle(const Oracle& oracle, const MatrixXd& X, Index first_eval, Index K) {
  MatrixXd Y(X.rows(), K);
  for (Index i = 0; i < X.rows(); ++i) {
    VectorXd y;
    try {
      y = oracle(X.row(i).transpose(), first_eval + i);
    } catch (const OracleFailureError&) {
      y = VectorXd::Constant(K, std::numeric_limits<double>::quiet_NaN());
    }
    if (y.size() != K) throw std::runtime_error("oracle returned the wrong number of objectives");
    if (!y.allFinite()) y.setConstant(std::numeric_limits<double>::quiet_NaN());
    Y.row(i) = y.transpose();
  }
  return Y;
}

void incorporate(BOState& state, const Proposal& proposal, const MatrixXd& Y, const QpotsOptions& options,
                 double extra_seconds) {
  const auto t0 = std::chrono::steady_clock::now();
  const MatrixXd& X = proposal.batch.points;
  if (Y.rows() != X.rows() || Y.cols() != state.num_objectives()) {
    throw std::invalid_argument("incorporate: observation shape mismatch");
  }
  for (Index i = 0; i < X.rows(); ++i) {
    VectorXd y = Y.row(i).transpose();
    if (!y.allFinite()) y.setConstant(std::numeric_limits<double>::quiet_NaN());
    state.data.append(X.row(i).transpose(), y);
  }
  if (options.budget > 0 && 10 * state.failures() > options.budget) {
    throw OracleFailureError("oracle failed on " + std::to_string(state.failures()) + " of " +
                             std::to_string(state.data.size()) + " evaluations (more than 10% of the budget of " +
                             std::to_string(options.budget) + ")");
  }
  ++state.iteration;
  update_models(state, options);

  IterationRecord rec;
  rec.iteration = state.iteration;
  rec.evaluations = state.data.size();
  rec.hv = state.archive_hv();
  rec.batch_X = X;
  rec.batch_Y = state.data.Y.bottomRows(X.rows());
  rec.xstar_index = proposal.batch.xstar_index;
  rec.maximin_distance = proposal.batch.distance;
  rec.xstar_size = proposal.xstar_size;
  rec.wallclock_s = proposal.seconds + extra_seconds + seconds_since(t0);
  state.history.records.push_back(std::move(rec));
}

void qpots_step(BOState& state, const QpotsOptions& options, const Oracle& oracle) {
  Index q = options.q;
  if (options.budget > 0) q = std::min(q, options.budget - state.data.size());
  if (q < 1) throw std::logic_error("qpots_step: budget exhausted");
  const Proposal p = propose_batch(state, options, q);
  const auto t0 = std::chrono::steady_clock::now();
  const MatrixXd Y = evaluate_oracle(oracle, p.batch.points, state.data.size(), state.num_objectives());
  incorporate(state, p, Y, options, seconds_since(t0));
}

}  // namespace qpots
