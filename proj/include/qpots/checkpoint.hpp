#ifndef QPOTS_CHECKPOINT_HPP
#define QPOTS_CHECKPOINT_HPP

#include "qpots/acquisition.hpp"
#include "qpots/config.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace qpots {

inline constexpr int kCheckpointVersion = 1;

/// A proposed batch awaiting observations (ask/tell).
struct PendingBatch {
  std::vector<std::string> ids;
  Proposal proposal;
  /// The seed design rather than an acquisition batch.
  bool seed_phase = false;
};

/// Everything needed to continue one repetition of one experiment.
struct RunState {
  ExperimentConfig config;
  Index repetition = 0;
  /// False until the seed design has been observed.
  bool seeded = false;
  BOState bo;
  std::optional<PendingBatch> pending;
};

/// Deterministic JSON text (same state -> same bytes) with version and
/// checksum.
std::string checkpoint_text(const RunState& state);
/// Parses and verifies a checkpoint, then re-conditions the GP models.
/// Throws CheckpointError on corruption or version mismatch.
RunState parse_checkpoint(const std::string& text);

/// Writes via a temporary file and rename, so a crash never leaves a
/// partially written checkpoint.
void write_checkpoint(const std::filesystem::path& path, const RunState& state);
RunState read_checkpoint(const std::filesystem::path& path);

/// Whether the policy keeps GP models in its state.
bool policy_uses_models(const std::string& policy);

}  // namespace qpots

#endif  // QPOTS_CHECKPOINT_HPP
