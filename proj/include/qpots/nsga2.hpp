#ifndef QPOTS_NSGA2_HPP
#define QPOTS_NSGA2_HPP

#include "qpots/pareto.hpp"
#include "qpots/types.hpp"

#include <functional>
#include <utility>

namespace qpots {

struct EAConfig {
  Index pop_size = 100;
  int generations = 100;
  double crossover_prob = 0.9;
  double crossover_eta = 15.0;
  /// Negative means 1/d.
  double mutation_prob = -1.0;
  double mutation_eta = 20.0;
  std::uint64_t seed = 0;
  /// Return the nondominated set of every evaluated point instead of the
  /// final population's.
  bool archive_all = false;
  bool inject_incumbents = true;

  [[nodiscard]] double mutation_prob_for(Index dim) const {
    return mutation_prob < 0.0 ? 1.0 / static_cast<double>(dim) : mutation_prob;
  }
  void validate() const;
};

/// Evaluates the rows of X (minimization); returns one row per design.
using BatchObjective = std::function<MatrixXd(const MatrixXd& X)>;

/// Called with the population after initialization (generation 0) and after
/// each survival step.
using GenerationCallback = std::function<void(int generation, const MatrixXd& X, const MatrixXd& Y)>;

std::pair<VectorXd, VectorXd> sbx_crossover(const VectorXd& p1, const VectorXd& p2, const DesignSpace& space,
                                            const EAConfig& cfg, Rng& rng);

VectorXd polynomial_mutation(const VectorXd& x, const DesignSpace& space, const EAConfig& cfg, Rng& rng);

struct NsgaResult {
  ParetoArchive front;
  MatrixXd population_X;
  MatrixXd population_Y;
  Index evaluations = 0;
  /// Individuals whose objective vector had a non-finite entry.
  Index quarantined = 0;
};

/// Incumbent designs (rows) seeded into the initial population when
/// `cfg.inject_incumbents`; at most 10% of the population.
NsgaResult nsga2(const BatchObjective& objectives, const DesignSpace& space, const EAConfig& cfg,
                 const MatrixXd& incumbents = MatrixXd(), const GenerationCallback& on_generation = {});

ParetoArchive nsga2_run(const BatchObjective& objectives, const DesignSpace& space, const EAConfig& cfg);

}  // namespace qpots

#endif  // QPOTS_NSGA2_HPP
