#ifndef QPOTS_CONFIG_HPP
#define QPOTS_CONFIG_HPP

#include "qpots/acquisition.hpp"

#include <filesystem>
#include <string>

namespace qpots {

/// Declarative description of one experiment (all repetitions of one
/// policy). Text form is `key = value` lines; `#` starts a comment.
struct ExperimentConfig {
  /// Registered benchmark name, or "external" for the ask/tell protocol.
  std::string benchmark;
  std::string policy = "qpots";
  Index d = 0;
  Index K = 0;
  /// Bounds; only settable for external oracles (benchmarks use [0,1]^d).
  VectorXd lower;
  VectorXd upper;
  Index n_seed = 0;
  Index budget = 0;
  Index q = 1;
  double noise_var = 1e-3;
  bool learn_noise = false;
  EAConfig ea;
  /// Empty means "auto".
  VectorXd ref_point;
  Index repetitions = 10;
  std::uint64_t base_seed = 0;
  NystromPolicy nystrom = NystromPolicy::Auto;
  Index nystrom_threshold = 256;
  PathMode path_mode = PathMode::Consistent;
  int refit_every = 1;
  int fit_starts = 8;
  /// Starts for warm-started refits; 0 means fit_starts.
  int refit_starts = 0;
  int fit_max_iter = 200;
  MaximinSpace maximin_space = MaximinSpace::Unit;
  bool sobol_shift = false;
  std::string output_dir;

  [[nodiscard]] bool external() const { return benchmark == "external"; }
  [[nodiscard]] DesignSpace space() const { return DesignSpace(lower, upper); }
};

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

/// Parses, applies defaults and validates. Errors are ConfigError naming the
/// offending key.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Every key, fully resolved; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& cfg);

/// Policy options derived from a config.
QpotsOptions qpots_options(const ExperimentConfig& cfg);

std::vector<std::string> policy_names();

}  // namespace qpots

#endif  // QPOTS_CONFIG_HPP
