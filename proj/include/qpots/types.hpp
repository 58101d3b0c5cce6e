#ifndef QPOTS_TYPES_HPP
#define QPOTS_TYPES_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace qpots {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// A Cholesky (or other square-root) factorization failed even after the
/// bounded jitter escalation.
class IllConditionedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent experiment configuration. Message names the key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ask/tell ordering or id violations.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Checkpoint file is truncated, tampered with, or from another format version.
class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The external oracle failed too often for the run to be meaningful.
class OracleFailureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Axis-aligned box domain.
struct DesignSpace {
  VectorXd lower;
  VectorXd upper;

  DesignSpace() = default;
  DesignSpace(VectorXd lo, VectorXd hi);

  static DesignSpace unit_cube(Index dim);

  [[nodiscard]] Index dim() const { return lower.size(); }
  [[nodiscard]] VectorXd width() const { return upper - lower; }
  [[nodiscard]] bool contains(const Eigen::Ref<const VectorXd>& x) const;

  /// Maps rows of X into [0,1]^d.
  [[nodiscard]] MatrixXd to_unit(const Eigen::Ref<const MatrixXd>& X) const;
  [[nodiscard]] MatrixXd from_unit(const Eigen::Ref<const MatrixXd>& U) const;
  /// Clamps x componentwise into the box.
  void clamp(Eigen::Ref<VectorXd> x) const;
};

bool operator==(const DesignSpace& a, const DesignSpace& b);

/// Deterministic random stream. Wraps mt19937_64 with portable
/// uniform/normal conversions so that draws are reproducible across
/// standard-library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t next_u64();
  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  Index uniform_index(Index n);
  /// Standard normal via Box-Muller; no cached second variate.
  double normal();
  VectorXd normal_vector(Index n);

  [[nodiscard]] std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Derives a child seed from a parent seed and a sequence of tags. Used to
/// build seed hierarchies (repetition -> iteration -> objective ...).
template <typename... Tags>
std::uint64_t derive_seed(std::uint64_t root, Tags... tags) {
  std::uint64_t s = mix64(root);
  ((s = mix64(s ^ (static_cast<std::uint64_t>(tags) + 0x9e3779b97f4a7c15ULL))), ...);
  return s;
}

/// Stable 64-bit FNV-1a hash of a string, for turning names into seed tags.
std::uint64_t hash_tag(const std::string& s);

}  // namespace qpots

#endif  // QPOTS_TYPES_HPP
