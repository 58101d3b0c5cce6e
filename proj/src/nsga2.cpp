#include "qpots/nsga2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace qpots {

void EAConfig::validate() const {
  if (pop_size < 2 || pop_size % 2 != 0) throw std::invalid_argument("EAConfig: pop_size must be even and >= 2");
  if (generations < 1) throw std::invalid_argument("EAConfig: generations must be >= 1");
  if (!(crossover_prob >= 0.0 && crossover_prob <= 1.0)) throw std::invalid_argument("EAConfig: crossover_prob");
  if (!(mutation_prob <= 1.0)) throw std::invalid_argument("EAConfig: mutation_prob");
  if (!(crossover_eta > 0.0) || !(mutation_eta > 0.0)) throw std::invalid_argument("EAConfig: eta must be positive");
}

std::pair<VectorXd, VectorXd> sbx_crossover(const VectorXd& p1, const VectorXd& p2, const DesignSpace& space,
                                            const EAConfig& cfg, Rng& rng) {
  VectorXd c1 = p1;
  VectorXd c2 = p2;
  if (rng.uniform() >= cfg.crossover_prob) return {c1, c2};
  const double expo = 1.0 / (cfg.crossover_eta + 1.0);
  for (Index i = 0; i < p1.size(); ++i) {
    if (rng.uniform() >= 0.5) continue;
    const double u = rng.uniform();
    if (std::abs(p1[i] - p2[i]) < 1e-14) continue;
    const double beta = u <= 0.5 ? std::pow(2.0 * u, expo) : std::pow(1.0 / (2.0 * (1.0 - u)), expo);
    c1[i] = 0.5 * ((1.0 + beta) * p1[i] + (1.0 - beta) * p2[i]);
    c2[i] = 0.5 * ((1.0 - beta) * p1[i] + (1.0 + beta) * p2[i]);
  }
  space.clamp(c1);
  space.clamp(c2);
  return {c1, c2};
}

VectorXd polynomial_mutation(const VectorXd& x, const DesignSpace& space, const EAConfig& cfg, Rng& rng) {
  VectorXd y = x;
  const double pm = cfg.mutation_prob_for(x.size());
  const double expo = 1.0 / (cfg.mutation_eta + 1.0);
  for (Index i = 0; i < x.size(); ++i) {
    if (rng.uniform() >= pm) continue;
    const double u = rng.uniform();
    const double delta = u < 0.5 ? std::pow(2.0 * u, expo) - 1.0 : 1.0 - std::pow(2.0 * (1.0 - u), expo);
    y[i] += delta * (space.upper[i] - space.lower[i]);
  }
  space.clamp(y);
  return y;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Ranked {
  std::vector<Index> rank;
  VectorXd crowding;
};

Ranked rank_population(const MatrixXd& Y) {
  Ranked r;
  r.rank.assign(static_cast<std::size_t>(Y.rows()), 0);
  r.crowding = VectorXd::Zero(Y.rows());
  const auto fronts = fast_nondominated_sort(Y);
  for (std::size_t f = 0; f < fronts.size(); ++f) {
    MatrixXd Yf(static_cast<Index>(fronts[f].size()), Y.cols());
    for (std::size_t i = 0; i < fronts[f].size(); ++i) Yf.row(static_cast<Index>(i)) = Y.row(fronts[f][i]);
    const VectorXd cd = crowding_distance(Yf);
    for (std::size_t i = 0; i < fronts[f].size(); ++i) {
      r.rank[static_cast<std::size_t>(fronts[f][i])] = static_cast<Index>(f);
      r.crowding[fronts[f][i]] = cd[static_cast<Index>(i)];
    }
  }
  return r;
}

Index tournament(const Ranked& r, Index n, Rng& rng) {
  const Index a = rng.uniform_index(n);
  const Index b = rng.uniform_index(n);
  const auto ra = r.rank[static_cast<std::size_t>(a)];
  const auto rb = r.rank[static_cast<std::size_t>(b)];
  if (ra != rb) return ra < rb ? a : b;
  if (r.crowding[a] != r.crowding[b]) return r.crowding[a] > r.crowding[b] ? a : b;
  return std::min(a, b);
}

/// Quarantine: any non-finite entry makes the whole row +inf (worst rank).
Index quarantine(MatrixXd& Y) {
  Index count = 0;
  for (Index i = 0; i < Y.rows(); ++i) {
    if (!Y.row(i).allFinite()) {
      Y.row(i).setConstant(kInf);
      ++count;
    }
  }
  return count;
}

/// Picks `take` members of `front` (indices into Y) by descending crowding,
/// lower index first on ties.
std::vector<Index> by_crowding(const MatrixXd& Y, const std::vector<Index>& front, Index take,
                               const std::vector<Index>& forced) {
  std::vector<Index> out = forced;
  if (static_cast<Index>(out.size()) >= take) {
    out.resize(static_cast<std::size_t>(take));
    return out;
  }
  MatrixXd Yf(static_cast<Index>(front.size()), Y.cols());
  for (std::size_t i = 0; i < front.size(); ++i) Yf.row(static_cast<Index>(i)) = Y.row(front[i]);
  const VectorXd cd = crowding_distance(Yf);
  std::vector<Index> order(front.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return cd[a] > cd[b]; });
  for (Index o : order) {
    if (static_cast<Index>(out.size()) >= take) break;
    const Index idx = front[static_cast<std::size_t>(o)];
    if (std::find(forced.begin(), forced.end(), idx) == forced.end()) out.push_back(idx);
  }
  return out;
}

ParetoArchive finite_front(const MatrixXd& X, const MatrixXd& Y) { return pareto_archive(X, Y); }

}  // namespace

NsgaResult nsga2(const BatchObjective& objectives, const DesignSpace& space, const EAConfig& cfg,
                 const MatrixXd& incumbents, const GenerationCallback& on_generation) {
  cfg.validate();
  const Index d = space.dim();
  const Index N = cfg.pop_size;
  Rng rng(cfg.seed);
  NsgaResult res;

  MatrixXd X(N, d);
  Index injected = 0;
  if (cfg.inject_incumbents && incumbents.rows() > 0) {
    if (incumbents.cols() != d) throw std::invalid_argument("nsga2: incumbent dimension mismatch");
    injected = std::min<Index>(incumbents.rows(), N / 10);
    for (Index i = 0; i < injected; ++i) {
      VectorXd x = incumbents.row(i).transpose();
      space.clamp(x);
      X.row(i) = x.transpose();
    }
  }
  for (Index i = injected; i < N; ++i) {
    for (Index j = 0; j < d; ++j) X(i, j) = rng.uniform(space.lower[j], space.upper[j]);
  }

  auto evaluate = [&](const MatrixXd& Xe) {
    MatrixXd Ye = objectives(Xe);
    if (Ye.rows() != Xe.rows()) throw std::runtime_error("nsga2: objective returned wrong row count");
    res.evaluations += Xe.rows();
    res.quarantined += quarantine(Ye);
    return Ye;
  };

  MatrixXd Y = evaluate(X);
  const Index K = Y.cols();
  MatrixXd allX, allY;
  Index all_n = 0;
  auto record = [&](const MatrixXd& Xe, const MatrixXd& Ye) {
    if (!cfg.archive_all) return;
    if (allX.rows() < all_n + Xe.rows()) {
      const Index cap = std::max<Index>(2 * allX.rows(), all_n + Xe.rows());
      allX.conservativeResize(cap, d);
      allY.conservativeResize(cap, K);
    }
    allX.middleRows(all_n, Xe.rows()) = Xe;
    allY.middleRows(all_n, Ye.rows()) = Ye;
    all_n += Xe.rows();
  };
  record(X, Y);
  if (on_generation) on_generation(0, X, Y);

  MatrixXd OX(N, d), CX(2 * N, d), CY(2 * N, K);
  for (int gen = 1; gen <= cfg.generations; ++gen) {
    const Ranked ranked = rank_population(Y);
    for (Index i = 0; i < N; i += 2) {
      const Index a = tournament(ranked, N, rng);
      const Index b = tournament(ranked, N, rng);
      auto [c1, c2] = sbx_crossover(X.row(a).transpose(), X.row(b).transpose(), space, cfg, rng);
      OX.row(i) = polynomial_mutation(c1, space, cfg, rng).transpose();
      OX.row(i + 1) = polynomial_mutation(c2, space, cfg, rng).transpose();
    }
    const MatrixXd OY = evaluate(OX);
    record(OX, OY);

    CX.topRows(N) = X;
    CX.bottomRows(N) = OX;
    CY.topRows(N) = Y;
    CY.bottomRows(N) = OY;
    const auto fronts = fast_nondominated_sort(CY);
    std::vector<Index> keep;
    keep.reserve(static_cast<std::size_t>(N));
    for (std::size_t f = 0; f < fronts.size() && static_cast<Index>(keep.size()) < N; ++f) {
      const auto& front = fronts[f];
      const Index room = N - static_cast<Index>(keep.size());
      if (static_cast<Index>(front.size()) <= room) {
        keep.insert(keep.end(), front.begin(), front.end());
        continue;
      }
      std::vector<Index> forced;
      if (f == 0) {
        // Keep every previous nondominated member, or its first dominator in
        // the new front, so the population's front never loses volume.
        const auto prev_nd = nondominated_filter(Y);
        for (Index p : prev_nd) {
          Index pick = p;
          if (std::find(front.begin(), front.end(), p) == front.end()) {
            for (Index c : front) {
              if (dominates(CY.row(c), CY.row(p))) {
                pick = c;
                break;
              }
            }
          }
          if (std::find(forced.begin(), forced.end(), pick) == forced.end()) forced.push_back(pick);
        }
      }
      const auto chosen = by_crowding(CY, front, room, forced);
      keep.insert(keep.end(), chosen.begin(), chosen.end());
    }
    MatrixXd NX(N, d), NY(N, K);
    for (Index i = 0; i < N; ++i) {
      NX.row(i) = CX.row(keep[static_cast<std::size_t>(i)]);
      NY.row(i) = CY.row(keep[static_cast<std::size_t>(i)]);
    }
    X.swap(NX);
    Y.swap(NY);
    if (on_generation) on_generation(gen, X, Y);
  }

  res.front = cfg.archive_all ? finite_front(allX.topRows(all_n), allY.topRows(all_n)) : finite_front(X, Y);
  res.population_X = std::move(X);
  res.population_Y = std::move(Y);
  return res;
}

ParetoArchive nsga2_run(const BatchObjective& objectives, const DesignSpace& space, const EAConfig& cfg) {
  return nsga2(objectives, space, cfg).front;
}

}  // namespace qpots
