#ifndef QPOTS_BASELINES_HPP
#define QPOTS_BASELINES_HPP

#include "qpots/acquisition.hpp"
#include "qpots/sobol.hpp"

#include <optional>

namespace qpots {

/// Acquires the next q Sobol points of `stream` (q clamped to the budget).
void sobol_step(BOState& state, Index q, Index budget, SobolStream& stream, const Oracle& oracle);

/// Augmented Chebyshev scalarization (minimized):
/// max_k w_k f_k + 0.05 * sum_k w_k f_k.
double chebyshev(const Eigen::Ref<const VectorXd>& f, const Eigen::Ref<const VectorXd>& w);

/// Uniform draw from the probability simplex.
VectorXd simplex_weights(Index K, Rng& rng);

/// One scalarized Thompson-sampling point per batch slot: a fresh path per
/// objective, fresh simplex weights (or `forced_weights`), and a
/// single-objective NSGA-II minimization of the scalarized standardized
/// path values.
Proposal propose_scalarized(const BOState& state, const QpotsOptions& options, Index q,
                            const std::optional<VectorXd>& forced_weights = std::nullopt);

void scalarized_ts_step(BOState& state, const QpotsOptions& options, const Oracle& oracle,
                        const std::optional<VectorXd>& forced_weights = std::nullopt);

}  // namespace qpots

#endif  // QPOTS_BASELINES_HPP
