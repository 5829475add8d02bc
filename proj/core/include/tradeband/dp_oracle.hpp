#pragma once

#include <cstddef>
#include <vector>

#include "tradeband/ou_model.hpp"

namespace tradeband {

/// Brute-force check of the band: backward induction of the discretized
/// Bellman equation on a (position, predictor) grid.

struct TransitionRow {
  std::size_t first = 0;        // index of the first stored predictor node
  std::vector<double> weights;  // probabilities of nodes first, first+1, ...
};

struct DpGrid {
  OuParams params;
  std::vector<double> pi_values;  // uniform, spacing dpi
  std::vector<double> p_values;   // uniform over +-n_sigma sigma_p, spacing dp
  double dpi = 0.0;
  double dp = 0.0;
  /// Row j is the Gaussian kernel of mean (1 - eps) p_j and std beta sampled
  /// at the predictor nodes, renormalized after truncation. Entries below
  /// e^{-40} of the peak are dropped.
  std::vector<TransitionRow> transition;
};

/// Predictor nodes over +-n_sigma sigma_p, position nodes over
/// +-pi_span_sigma sigma_p. Requires n_p, n_pi >= 3, n_sigma >= 4 and
/// beta >= dp (at least one predictor cell per noise standard deviation).
DpGrid build_grid(const OuParams& params, double n_sigma, std::size_t n_p,
                  double pi_span_sigma, std::size_t n_pi);

struct NoTradeInterval {
  double p = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t lower_index = 0;
  std::size_t upper_index = 0;
};

struct DpSolution {
  DpGrid grid;
  CostParams costs;
  /// V(pi_i, p_j) at j * n_pi + i, shifted by a constant each step.
  std::vector<double> value;
  /// Index of pi*(pi_i, p_j), same layout.
  std::vector<std::size_t> policy;
  std::vector<NoTradeInterval> no_trade;
  std::size_t steps = 0;
  bool converged = false;

  std::size_t n_pi() const { return grid.pi_values.size(); }
  std::size_t n_p() const { return grid.p_values.size(); }
  double v(std::size_t j, std::size_t i) const { return value[j * n_pi() + i]; }
};

/// V_0 = 0 and
///   V_{h+1}(pi, p) = p pi - pi^2/2 + sum_{p'} P(p'|p) max_{pi'} [V_h(pi', p') - Gamma |pi' - pi|].
/// The inner maximum is an L1 max-convolution done in two linear passes.
/// Stops early once every no-trade interval has been unchanged for
/// `stationary_window` consecutive steps; `converged` is false if that never
/// happened within `horizon` steps.
DpSolution backward_induction(const DpGrid& grid, const CostParams& costs, std::size_t horizon,
                              std::size_t stationary_window = 10);

/// Maximal set {pi : pi*(pi, p) = pi} for every predictor node. Throws
/// std::runtime_error if any of them is not a contiguous run of nodes.
std::vector<NoTradeInterval> extract_no_trade(const DpSolution& solution);

struct StructureReport {
  bool concave = true;
  bool idempotent = true;
  bool trade_to_edge = true;
  bool predictor_inside = true;
  double worst_concavity = 0.0;  // max second difference, compared to tol
  double concavity_tolerance = 0.0;
  std::size_t idempotence_violations = 0;
  std::size_t trade_to_edge_violations = 0;
  std::size_t predictor_violations = 0;

  bool passed() const { return concave && idempotent && trade_to_edge && predictor_inside; }
};

/// Concavity of V in pi (second differences <= relative_tol * max|V|),
/// idempotence of pi*, trades landing on the nearer zone edge, and the grid
/// node nearest to p inside the zone (for p within the position grid).
StructureReport check_structure(const DpSolution& solution, double relative_tol = 1e-9);

}  // namespace tradeband
