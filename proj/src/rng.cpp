#include "qpots/types.hpp"

#include <cmath>
#include <numbers>

namespace qpots {

DesignSpace::DesignSpace(VectorXd lo, VectorXd hi) : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size() || lower.size() == 0) {
    throw std::invalid_argument("DesignSpace: bounds must be nonempty and of equal length");
  }
  for (Index i = 0; i < lower.size(); ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(lower[i] < upper[i])) {
      throw std::invalid_argument("DesignSpace: require finite lower[i] < upper[i]");
    }
  }
}

DesignSpace DesignSpace::unit_cube(Index dim) {
  return DesignSpace(VectorXd::Zero(dim), VectorXd::Ones(dim));
}

bool DesignSpace::contains(const Eigen::Ref<const VectorXd>& x) const {
  if (x.size() != dim()) return false;
  return (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
}

MatrixXd DesignSpace::to_unit(const Eigen::Ref<const MatrixXd>& X) const {
  const Eigen::RowVectorXd inv = width().cwiseInverse().transpose();
  return (X.rowwise() - lower.transpose()).array().rowwise() * inv.array();
}

MatrixXd DesignSpace::from_unit(const Eigen::Ref<const MatrixXd>& U) const {
  const Eigen::RowVectorXd w = width().transpose();
  MatrixXd X = U.array().rowwise() * w.array();
  return X.rowwise() + lower.transpose();
}

void DesignSpace::clamp(Eigen::Ref<VectorXd> x) const {
  x = x.cwiseMax(lower).cwiseMin(upper);
}

bool operator==(const DesignSpace& a, const DesignSpace& b) {
  return a.lower == b.lower && a.upper == b.upper;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_tag(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

std::uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

Index Rng::uniform_index(Index n) {
  if (n <= 0) throw std::invalid_argument("Rng::uniform_index: n must be positive");
  // Lemire-style rejection to avoid modulo bias.
  const auto bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % bound);
  std::uint64_t r;
  do {
    r = next_u64();
  } while (r >= limit);
  return static_cast<Index>(r % bound);
}

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

VectorXd Rng::normal_vector(Index n) {
  VectorXd z(n);
  for (Index i = 0; i < n; ++i) z[i] = normal();
  return z;
}

}  // namespace qpots
