#include "qpots/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace qpots {

std::vector<Index> nondominated_filter(const Eigen::Ref<const MatrixXd>& Y) {
  const Index n = Y.rows();
  std::vector<char> dominated(static_cast<std::size_t>(n), 0);
  for (Index i = 0; i < n; ++i) {
    if (dominated[static_cast<std::size_t>(i)]) continue;
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      if (dominates(Y.row(j), Y.row(i))) {
        dominated[static_cast<std::size_t>(i)] = 1;
        break;
      }
    }
  }
  std::vector<Index> out;
  for (Index i = 0; i < n; ++i) {
    if (!dominated[static_cast<std::size_t>(i)]) out.push_back(i);
  }
  return out;
}

std::vector<std::vector<Index>> fast_nondominated_sort(const Eigen::Ref<const MatrixXd>& Y) {
  const Index n = Y.rows();
  std::vector<std::vector<Index>> dominated_by_me(static_cast<std::size_t>(n));
  std::vector<Index> domination_count(static_cast<std::size_t>(n), 0);
  std::vector<std::vector<Index>> fronts(1);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (dominates(Y.row(i), Y.row(j))) {
        dominated_by_me[static_cast<std::size_t>(i)].push_back(j);
        ++domination_count[static_cast<std::size_t>(j)];
      } else if (dominates(Y.row(j), Y.row(i))) {
        dominated_by_me[static_cast<std::size_t>(j)].push_back(i);
        ++domination_count[static_cast<std::size_t>(i)];
      }
    }
  }
  for (Index i = 0; i < n; ++i) {
    if (domination_count[static_cast<std::size_t>(i)] == 0) fronts[0].push_back(i);
  }
  std::size_t r = 0;
  while (r < fronts.size() && !fronts[r].empty()) {
    std::vector<Index> next;
    for (Index i : fronts[r]) {
      for (Index j : dominated_by_me[static_cast<std::size_t>(i)]) {
        if (--domination_count[static_cast<std::size_t>(j)] == 0) next.push_back(j);
      }
    }
    std::sort(next.begin(), next.end());
    if (next.empty()) break;
    fronts.push_back(std::move(next));
    ++r;
  }
  if (fronts.size() == 1 && fronts[0].empty()) fronts.clear();
  return fronts;
}

VectorXd crowding_distance(const Eigen::Ref<const MatrixXd>& Yfront) {
  const Index p = Yfront.rows();
  const Index K = Yfront.cols();
  constexpr double inf = std::numeric_limits<double>::infinity();
  VectorXd dist = VectorXd::Zero(p);
  if (p == 0) return dist;

  // Collapse exact duplicates onto their first occurrence.
  std::vector<Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    for (Index k = 0; k < K; ++k) {
      if (Yfront(a, k) != Yfront(b, k)) return Yfront(a, k) < Yfront(b, k);
    }
    return false;
  });
  std::vector<Index> unique;
  std::vector<char> is_dup(static_cast<std::size_t>(p), 0);
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i > 0 && Yfront.row(order[i]) == Yfront.row(order[i - 1])) {
      is_dup[static_cast<std::size_t>(order[i])] = 1;
    } else {
      unique.push_back(order[i]);
    }
  }
  std::sort(unique.begin(), unique.end());
  const auto u = static_cast<Index>(unique.size());
  if (u <= 2) {
    for (Index i : unique) dist[i] = inf;
    return dist;
  }
  for (Index k = 0; k < K; ++k) {
    std::vector<Index> idx = unique;
    std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return Yfront(a, k) < Yfront(b, k); });
    const double lo = Yfront(idx.front(), k);
    const double hi = Yfront(idx.back(), k);
    dist[idx.front()] = inf;
    dist[idx.back()] = inf;
    const double range = hi - lo;
    if (!(range > 0.0)) continue;
    for (Index i = 1; i + 1 < u; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      dist[idx[ii]] += (Yfront(idx[ii + 1], k) - Yfront(idx[ii - 1], k)) / range;
    }
  }
  for (Index i = 0; i < p; ++i) {
    if (is_dup[static_cast<std::size_t>(i)]) dist[i] = 0.0;
  }
  return dist;
}

namespace {

/// Points as rows of a std::vector of K-arrays for the slicing recursion.
using PointSet = std::vector<VectorXd>;

double hv2d(PointSet pts, double r0, double r1) {
  std::sort(pts.begin(), pts.end(), [](const VectorXd& a, const VectorXd& b) {
    return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]);
  });
  double area = 0.0;
  double best = r1;
  for (const VectorXd& p : pts) {
    if (p[1] < best) {
      area += (r0 - p[0]) * (best - p[1]);
      best = p[1];
    }
  }
  return area;
}

double hv_slice(PointSet pts, const VectorXd& ref, Index K) {
  if (pts.empty()) return 0.0;
  if (K == 2) return hv2d(std::move(pts), ref[0], ref[1]);
  const Index last = K - 1;
  std::sort(pts.begin(), pts.end(), [last](const VectorXd& a, const VectorXd& b) { return a[last] < b[last]; });
  double vol = 0.0;
  PointSet active;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    active.push_back(pts[i].head(last));
    const double top = i + 1 < pts.size() ? pts[i + 1][last] : ref[last];
    const double h = top - pts[i][last];
    if (h > 0.0) vol += h * hv_slice(active, ref.head(last), last);
  }
  return vol;
}

}  // namespace

HypervolumeResult hypervolume_detailed(const Eigen::Ref<const MatrixXd>& Y, const Eigen::Ref<const VectorXd>& ref,
                                       const HypervolumeOptions& options) {
  const Index K = Y.cols();
  if (ref.size() != K && Y.rows() > 0) throw std::invalid_argument("hypervolume: reference point length mismatch");
  HypervolumeResult out;
  PointSet pts;
  for (Index i = 0; i < Y.rows(); ++i) {
    const VectorXd y = Y.row(i).transpose();
    if (!y.allFinite() || (y.array() > ref.array()).any()) {
      ++out.excluded;
      continue;
    }
    pts.push_back(y);
  }
  if (pts.empty()) return out;
  if (K == 1) {
    double best = ref[0];
    for (const auto& p : pts) best = std::min(best, p[0]);
    out.value = ref[0] - best;
    return out;
  }
  if (K <= 3) {
    out.value = hv_slice(std::move(pts), ref, K);
    return out;
  }
  // Monte Carlo over the bounding box [min_i y_i, ref].
  VectorXd lo = pts.front();
  for (const auto& p : pts) lo = lo.cwiseMin(p);
  const VectorXd width = ref - lo;
  const double box = width.prod();
  out.exact = false;
  if (!(box > 0.0)) return out;
  Rng rng(options.mc_seed);
  Index hits = 0;
  VectorXd z(K);
  for (Index s = 0; s < options.mc_samples; ++s) {
    for (Index k = 0; k < K; ++k) z[k] = lo[k] + width[k] * rng.uniform();
    for (const auto& p : pts) {
      if ((p.array() <= z.array()).all()) {
        ++hits;
        break;
      }
    }
  }
  const double frac = static_cast<double>(hits) / static_cast<double>(options.mc_samples);
  out.value = box * frac;
  out.std_error = box * std::sqrt(frac * (1.0 - frac) / static_cast<double>(options.mc_samples));
  return out;
}

double hypervolume(const Eigen::Ref<const MatrixXd>& Y, const Eigen::Ref<const VectorXd>& ref) {
  return hypervolume_detailed(Y, ref).value;
}

ParetoArchive pareto_archive(const Eigen::Ref<const MatrixXd>& X, const Eigen::Ref<const MatrixXd>& Y) {
  if (X.rows() != Y.rows()) throw std::invalid_argument("pareto_archive: row count mismatch");
  std::vector<Index> finite;
  for (Index i = 0; i < Y.rows(); ++i) {
    if (Y.row(i).allFinite()) finite.push_back(i);
  }
  MatrixXd Yf(static_cast<Index>(finite.size()), Y.cols());
  for (std::size_t i = 0; i < finite.size(); ++i) Yf.row(static_cast<Index>(i)) = Y.row(finite[i]);
  const auto nd = nondominated_filter(Yf);
  std::vector<Index> keep;
  for (Index j : nd) {
    const Index row = finite[static_cast<std::size_t>(j)];
    bool dup = false;
    for (Index k : keep) {
      if (X.row(k) == X.row(row)) {
        dup = true;
        break;
      }
    }
    if (!dup) keep.push_back(row);
  }
  ParetoArchive a;
  a.X.resize(static_cast<Index>(keep.size()), X.cols());
  a.Y.resize(static_cast<Index>(keep.size()), Y.cols());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    a.X.row(static_cast<Index>(i)) = X.row(keep[i]);
    a.Y.row(static_cast<Index>(i)) = Y.row(keep[i]);
  }
  return a;
}

double igd(const Eigen::Ref<const MatrixXd>& Y, const Eigen::Ref<const MatrixXd>& reference_front) {
  if (reference_front.rows() == 0) return 0.0;
  if (Y.rows() == 0) return std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (Index i = 0; i < reference_front.rows(); ++i) {
    total += std::sqrt((Y.rowwise() - reference_front.row(i)).rowwise().squaredNorm().minCoeff());
  }
  return total / static_cast<double>(reference_front.rows());
}

VectorXd default_reference_point(const Eigen::Ref<const MatrixXd>& Y) {
  VectorXd lo = VectorXd::Constant(Y.cols(), std::numeric_limits<double>::infinity());
  VectorXd hi = VectorXd::Constant(Y.cols(), -std::numeric_limits<double>::infinity());
  for (Index i = 0; i < Y.rows(); ++i) {
    if (!Y.row(i).allFinite()) continue;
    lo = lo.cwiseMin(Y.row(i).transpose());
    hi = hi.cwiseMax(Y.row(i).transpose());
  }
  if (!lo.allFinite()) throw std::invalid_argument("default_reference_point: no finite observations");
  return hi + 0.1 * (hi - lo);
}

}  // namespace qpots
