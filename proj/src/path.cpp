#include "qpots/path.hpp"

#include "qpots/pareto.hpp"

#include <bit>
#include <cmath>
#include <string>

namespace qpots {

std::size_t SamplePath::KeyHash::operator()(const std::vector<double>& k) const noexcept {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (double v : k) h = mix64(h ^ std::bit_cast<std::uint64_t>(v));
  return static_cast<std::size_t>(h);
}

SamplePath::SamplePath(std::shared_ptr<const GPModel> model, std::uint64_t seed, PathOptions options)
    : model_(std::move(model)), options_(std::move(options)), rng_(seed), seed_(seed) {
  if (!model_) throw std::invalid_argument("SamplePath: null model");
  const Index n = model_->num_train();
  const Index d = model_->dim();
  cond_X_.resize(std::max<Index>(2 * n, 16), d);
  L_ = MatrixXd::Zero(cond_X_.rows(), cond_X_.rows());
  u_.resize(cond_X_.rows());
  cond_X_.topRows(n) = model_->unit_X();
  L_.topLeftCorner(n, n) = model_->chol().triangularView<Eigen::Lower>();
  u_.head(n) = model_->chol().triangularView<Eigen::Lower>().solve(model_->std_y());
  size_ = n;
}

void SamplePath::reserve(Index capacity) {
  if (capacity <= cond_X_.rows()) return;
  const Index cap = std::max(capacity, 2 * cond_X_.rows());
  MatrixXd X(cap, cond_X_.cols());
  X.topRows(size_) = cond_X_.topRows(size_);
  MatrixXd L = MatrixXd::Zero(cap, cap);
  L.topLeftCorner(size_, size_) = L_.topLeftCorner(size_, size_);
  VectorXd u(cap);
  u.head(size_) = u_.head(size_);
  cond_X_.swap(X);
  L_.swap(L);
  u_.swap(u);
}

VectorXd SamplePath::draw_exact(const MatrixXd& U) {
  const Index m = size_;
  const Index B = U.rows();
  const auto L = L_.topLeftCorner(m, m).triangularView<Eigen::Lower>();
  const MatrixXd W = L.solve(model_->unit_kernel(cond_X_.topRows(m), U));
  const VectorXd mean = W.transpose() * u_.head(m);
  MatrixXd S = matern52_gram(U, model_->unit_lengthscales(), model_->std_signal_var());
  S.noalias() -= W.transpose() * W;
  S = (0.5 * (S + S.transpose())).eval();

  const PivotedCholesky pc = pivoted_cholesky(S, options_.residual_tol * model_->std_signal_var());
  const auto r = static_cast<Index>(pc.pivots.size());
  const VectorXd z = rng_.normal_vector(r);
  VectorXd vals = mean + pc.G * z;
  std::vector<char> is_pivot(static_cast<std::size_t>(B), 0);
  for (Index p : pc.pivots) is_pivot[static_cast<std::size_t>(p)] = 1;
  for (Index i = 0; i < B; ++i) {
    if (!is_pivot[static_cast<std::size_t>(i)]) vals[i] += std::sqrt(pc.residual[i]) * rng_.normal();
  }

  // Append pivots to the joint factor: new rows [W_p^T, G_pp], and L^{-1} v
  // extends by z because G_pp z = f_p - mean_p.
  reserve(m + r);
  for (Index k = 0; k < r; ++k) {
    const Index p = pc.pivots[static_cast<std::size_t>(k)];
    const Index row = m + k;
    cond_X_.row(row) = U.row(p);
    L_.row(row).head(m) = W.col(p).transpose();
    for (Index l = 0; l <= k; ++l) L_(row, m + l) = pc.G(p, l);
    u_[row] = z[k];
  }
  size_ = m + r;
  return vals;
}

VectorXd SamplePath::draw_nystrom(const MatrixXd& U) {
  const Index m = size_;
  const auto L = L_.topLeftCorner(m, m).triangularView<Eigen::Lower>();
  if (!nystrom_) {
    const MatrixXd Z = options_.inducing ? model_->to_unit(*options_.inducing) : model_->unit_X();
    MatrixXd W_Z = L.solve(model_->unit_kernel(cond_X_.topRows(m), Z));
    MatrixXd S_ZZ = matern52_gram(Z, model_->unit_lengthscales(), model_->std_signal_var());
    S_ZZ.noalias() -= W_Z.transpose() * W_Z;
    S_ZZ = (0.5 * (S_ZZ + S_ZZ.transpose())).eval();
    NystromRoot root(S_ZZ);
    VectorXd z = rng_.normal_vector(Z.rows());
    nystrom_.emplace(NystromState{Z, std::move(W_Z), std::move(root), std::move(z)});
  }
  const NystromState& ns = *nystrom_;
  const MatrixXd W_U = L.solve(model_->unit_kernel(cond_X_.topRows(m), U));
  MatrixXd S_ZU = model_->unit_kernel(ns.Z, U);
  S_ZU.noalias() -= ns.W_Z.transpose() * W_U;
  const MatrixXd F = ns.root.apply(S_ZU);
  return W_U.transpose() * u_.head(m) + F * ns.z;
}

VectorXd SamplePath::draw_standardized(const MatrixXd& U) {
  bool use_nystrom = nystrom_.has_value();
  if (!use_nystrom) {
    switch (options_.nystrom) {
      case NystromPolicy::On: use_nystrom = true; break;
      case NystromPolicy::Off: use_nystrom = false; break;
      case NystromPolicy::Auto: use_nystrom = U.rows() > options_.nystrom_threshold; break;
    }
  }
  return use_nystrom ? draw_nystrom(U) : draw_exact(U);
}

VectorXd SamplePath::values(const Eigen::Ref<const MatrixXd>& Xq) {
  if (Xq.cols() != model_->dim()) throw std::invalid_argument("path_values: query dimension mismatch");
  if (!Xq.allFinite()) throw std::invalid_argument("path_values: non-finite query");
  const Index B = Xq.rows();
  VectorXd out(B);
  if (B == 0) return out;

  if (options_.mode == PathMode::PerGeneration) {
    PathOptions fresh_opts = options_;
    fresh_opts.mode = PathMode::Consistent;
    SamplePath fresh(model_, derive_seed(seed_, calls_++), fresh_opts);
    return fresh.values(Xq);
  }

  // Resolve cache hits and in-batch duplicates; collect new unique points.
  std::vector<Index> slot(static_cast<std::size_t>(B), -1);
  std::vector<Index> fresh_rows;
  std::unordered_map<std::vector<double>, Index, KeyHash> batch_index;
  for (Index i = 0; i < B; ++i) {
    std::vector<double> key(static_cast<std::size_t>(Xq.cols()));
    for (Index j = 0; j < Xq.cols(); ++j) key[static_cast<std::size_t>(j)] = Xq(i, j) + 0.0;
    if (auto it = index_.find(key); it != index_.end()) {
      slot[static_cast<std::size_t>(i)] = it->second;
      continue;
    }
    auto [it, inserted] = batch_index.try_emplace(std::move(key), static_cast<Index>(fresh_rows.size()));
    if (inserted) fresh_rows.push_back(i);
    slot[static_cast<std::size_t>(i)] = -2 - it->second;
  }

  if (!fresh_rows.empty()) {
    const auto n_new = static_cast<Index>(fresh_rows.size());
    if (cache_size() + n_new > options_.max_cache) {
      throw PathCacheOverflow("sample path cache would exceed " + std::to_string(options_.max_cache) +
                              " points; raise the Nyström threshold or lower the EA budget");
    }
    MatrixXd Xnew(n_new, Xq.cols());
    for (Index k = 0; k < n_new; ++k) Xnew.row(k) = Xq.row(fresh_rows[static_cast<std::size_t>(k)]);
    const VectorXd v = draw_standardized(model_->to_unit(Xnew));
    const Index base = cache_size();
    for (Index k = 0; k < n_new; ++k) {
      std::vector<double> key(static_cast<std::size_t>(Xq.cols()));
      for (Index j = 0; j < Xq.cols(); ++j) key[static_cast<std::size_t>(j)] = Xnew(k, j) + 0.0;
      index_.emplace(key, base + k);
      cached_X_.push_back(std::move(key));
      cached_vals_.push_back(v[k] * model_->y_scale() + model_->y_offset());
    }
    for (Index i = 0; i < B; ++i) {
      Index& s = slot[static_cast<std::size_t>(i)];
      if (s <= -2) s = base + (-2 - s);
    }
  }
  for (Index i = 0; i < B; ++i) out[i] = cached_vals_[static_cast<std::size_t>(slot[static_cast<std::size_t>(i)])];
  return out;
}

MatrixXd SamplePath::cached_X() const {
  MatrixXd X(cache_size(), model_->dim());
  for (Index i = 0; i < X.rows(); ++i) {
    for (Index j = 0; j < X.cols(); ++j) X(i, j) = cached_X_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return X;
}

VectorXd SamplePath::cached_vals() const {
  return Eigen::Map<const VectorXd>(cached_vals_.data(), cache_size());
}

VectorXd path_values(SamplePath& path, const Eigen::Ref<const MatrixXd>& Xq) { return path.values(Xq); }

std::vector<Index> select_inducing(const Dataset& data) {
  const auto rows = data.valid_rows();
  if (rows.empty()) throw std::invalid_argument("select_inducing: no valid observations");
  MatrixXd Y(static_cast<Index>(rows.size()), data.num_objectives());
  for (std::size_t i = 0; i < rows.size(); ++i) Y.row(static_cast<Index>(i)) = data.Y.row(rows[i]);
  std::vector<Index> out;
  for (Index j : nondominated_filter(Y)) out.push_back(rows[static_cast<std::size_t>(j)]);
  return out;
}

}  // namespace qpots
