#ifndef QPOTS_SOBOL_HPP
#define QPOTS_SOBOL_HPP

#include "qpots/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace qpots {

/// Unscrambled Sobol sequence (Joe-Kuo direction numbers, Gray-code order).
/// The origin is skipped: the first point returned is the sequence's second
/// element. An optional random digital shift XORs a fixed word per dimension.
class SobolStream {
 public:
  static constexpr Index kMaxDim = 128;

  explicit SobolStream(Index dim, std::optional<std::uint64_t> digital_shift_seed = std::nullopt);

  /// Next point in [0,1)^d.
  VectorXd next();
  [[nodiscard]] Index dim() const { return dim_; }
  /// Number of points emitted so far.
  [[nodiscard]] std::uint64_t index() const { return count_; }

 private:
  Index dim_;
  std::uint64_t count_ = 0;
  std::vector<std::uint32_t> v_;  // dim x 32 direction numbers
  std::vector<std::uint32_t> x_;
  std::vector<std::uint32_t> shift_;
};

/// Next point of `stream` mapped into `space`.
VectorXd sobol_next(SobolStream& stream, const DesignSpace& space);

}  // namespace qpots

#endif  // QPOTS_SOBOL_HPP
