#include "qpots/sobol.hpp"

#include <bit>
#include <stdexcept>

namespace qpots {

namespace {
#include "sobol_directions.inc"
constexpr int kBits = 32;
}  // namespace

SobolStream::SobolStream(Index dim, std::optional<std::uint64_t> digital_shift_seed)
    : dim_(dim),
      v_(static_cast<std::size_t>(dim) * kBits),
      x_(static_cast<std::size_t>(dim), 0),
      shift_(static_cast<std::size_t>(dim), 0) {
  if (dim < 1 || dim > kSobolMaxDim) {
    throw std::invalid_argument("SobolStream: dimension must lie in [1, " + std::to_string(kSobolMaxDim) + "]");
  }
  for (Index j = 0; j < dim; ++j) {
    std::uint32_t* v = &v_[static_cast<std::size_t>(j) * kBits];
    const std::uint32_t poly = kSobolPoly[j];
    const int s = std::bit_width(poly) - 1;
    std::uint32_t m[kBits];
    if (s == 0) {
      for (int i = 0; i < kBits; ++i) m[i] = 1;
    } else {
      for (int i = 0; i < s; ++i) m[i] = kSobolInit[j][i];
      for (int i = s; i < kBits; ++i) {
        std::uint32_t mi = m[i - s] ^ (m[i - s] << s);
        for (int k = 1; k < s; ++k) {
          if ((poly >> (s - k)) & 1U) mi ^= m[i - k] << k;
        }
        m[i] = mi;
      }
    }
    for (int i = 0; i < kBits; ++i) v[i] = m[i] << (kBits - 1 - i);
  }
  if (digital_shift_seed) {
    Rng rng(*digital_shift_seed);
    for (auto& s : shift_) s = static_cast<std::uint32_t>(rng.next_u64() >> 32);
  }
}

VectorXd SobolStream::next() {
  // Point n (0-based) in Gray-code order differs from point n-1 in the
  // direction number indexed by the lowest zero bit of n-1.
  const int c = std::countr_one(count_);
  if (c >= kBits) throw std::out_of_range("SobolStream: sequence exhausted");
  VectorXd p(dim_);
  for (Index j = 0; j < dim_; ++j) {
    auto& xj = x_[static_cast<std::size_t>(j)];
    xj ^= v_[static_cast<std::size_t>(j) * kBits + static_cast<std::size_t>(c)];
    p[j] = std::ldexp(static_cast<double>(xj ^ shift_[static_cast<std::size_t>(j)]), -kBits);
  }
  ++count_;
  return p;
}

VectorXd sobol_next(SobolStream& stream, const DesignSpace& space) {
  if (space.dim() != stream.dim()) throw std::invalid_argument("sobol_next: dimension mismatch");
  const VectorXd u = stream.next();
  return space.lower + u.cwiseProduct(space.width());
}

}  // namespace qpots
