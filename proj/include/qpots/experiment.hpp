#ifndef QPOTS_EXPERIMENT_HPP
#define QPOTS_EXPERIMENT_HPP

#include "qpots/checkpoint.hpp"
#include "qpots/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qpots {

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "QPOTS_OUTPUT_DIR";

/// Repetition r uses base_seed + r for the seed design and the policy.
std::uint64_t repetition_seed(const ExperimentConfig& cfg, Index rep);

/// n_seed designs drawn uniformly at random from the design space. Depends
/// only on (config, rep), never on the policy.
MatrixXd seed_design(const ExperimentConfig& cfg, Index rep);

/// Benchmark oracle with additive Gaussian noise. Seed-phase noise depends
/// only on (seed, evaluation index); afterwards each policy has its own
/// stream.
Oracle benchmark_oracle(const ExperimentConfig& cfg, Index rep);

/// Evaluates the seed design and builds the policy's initial state.
RunState start_run(const ExperimentConfig& cfg, Index rep, const Oracle& oracle);

/// One policy iteration.
void policy_step(RunState& state, const Oracle& oracle);

/// Steps until the budget is spent. Writes a checkpoint after every
/// iteration when `checkpoint` is given.
void advance_to_budget(RunState& state, const Oracle& oracle,
                       const std::optional<std::filesystem::path>& checkpoint = std::nullopt);

/// Final history (archive filled in) of a state.
RunHistory finish(const RunState& state);

RunHistory run_qpots(const ExperimentConfig& cfg, Index rep, const Oracle& oracle);
RunHistory run_sobol(const ExperimentConfig& cfg, Index rep, const Oracle& oracle);
RunHistory run_scalarized_ts(const ExperimentConfig& cfg, Index rep, const Oracle& oracle);
RunHistory run_policy(const ExperimentConfig& cfg, Index rep, const Oracle& oracle);

struct ExperimentResult {
  std::vector<RunHistory> runs;
  /// (repetition, message) of failed repetitions.
  std::vector<std::pair<Index, std::string>> failures;
  /// Worst failure class seen: 0 none, 2 config, 3 protocol, 4 numerical, 1 other.
  int failure_code = 0;
  std::filesystem::path policy_dir;
};

/// --out, else the config's output_dir, else $QPOTS_OUTPUT_DIR, else "results".
std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg, const std::string& cli_out);

/// Runs every repetition on a pool of `workers` threads (0 = hardware
/// concurrency) and writes per-repetition files plus merged history.csv and
/// summary.csv under <out>/<policy>/.
ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned workers, const std::filesystem::path& out_dir);

/// Finishes an interrupted repetition from its checkpoint and refreshes the
/// merged outputs of its directory.
RunHistory resume_run(const std::filesystem::path& state_path);

/// Writes the per-repetition output files of one finished run.
void write_run_outputs(const std::filesystem::path& policy_dir, const RunState& state);
/// Rebuilds history.csv and summary.csv from the repetition checkpoints in
/// `policy_dir`.
void write_merged_outputs(const std::filesystem::path& policy_dir);

// Ask/tell protocol over a state file.

/// Creates a fresh state file for repetition `rep`; nothing is pending.
void ask_tell_init(const ExperimentConfig& cfg, Index rep, const std::filesystem::path& state_path);
/// Proposes the next batch (the seed design first), marks it pending and
/// writes one JSON line {"id", "x"} per point. ProtocolError if a batch is
/// already pending or the budget is spent.
void ask(const std::filesystem::path& state_path, std::ostream& proposals);
/// Reads JSON lines {"id", "y"[, "failed": true]} answering the pending
/// batch, then advances the state.
void tell(const std::filesystem::path& state_path, std::istream& observations);

}  // namespace qpots

#endif  // QPOTS_EXPERIMENT_HPP
