#ifndef QPOTS_BENCHMARKS_HPP
#define QPOTS_BENCHMARKS_HPP

#include "qpots/types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace qpots {

// Closed-form test problems on the unit cube, minimization orientation.
// Out-of-bounds inputs throw std::invalid_argument.

VectorXd zdt3(const Eigen::Ref<const VectorXd>& x);
VectorXd dtlz3(const Eigen::Ref<const VectorXd>& x, Index K);
VectorXd dtlz7(const Eigen::Ref<const VectorXd>& x, Index K);
VectorXd branin_currin(const Eigen::Ref<const VectorXd>& x);

struct Benchmark {
  std::string name;
  Index d = 0;
  Index K = 0;
  DesignSpace space;
  std::function<VectorXd(const Eigen::Ref<const VectorXd>&)> eval;
  /// Hypervolume reference point used when a config asks for "auto".
  VectorXd ref_point;
};

/// Registered names: branin-currin, zdt3-d5, zdt3-d10, dtlz3-d5, dtlz3-d10,
/// dtlz7-d5, dtlz7-d10. `K` overrides the objective count of the DTLZ
/// problems (ignored by the others when 0).
Benchmark make_benchmark(const std::string& name, Index K = 0);
std::vector<std::string> benchmark_names();

/// eval(x) plus independent N(0, noise_var) per objective.
VectorXd observe(const Benchmark& bench, const Eigen::Ref<const VectorXd>& x, double noise_var, Rng& rng);

/// f1 intervals of the five disconnected ZDT3 Pareto-front segments.
const std::vector<std::pair<double, double>>& zdt3_front_segments();

/// `n` points evenly spread (by f1) over the true ZDT3 front.
MatrixXd zdt3_true_front(Index n);

}  // namespace qpots

#endif  // QPOTS_BENCHMARKS_HPP
