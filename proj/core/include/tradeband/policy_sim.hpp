#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "tradeband/band_solver.hpp"
#include "tradeband/ou_model.hpp"

namespace tradeband {

/// Raised when an analytic band is queried further than one grid spacing
/// outside the predictor range it was solved on.
class ExtrapolationError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

struct Edges {
  double lower = 0.0;
  double upper = 0.0;
};

/// A band trading rule: hold inside [l(p), u(p)], otherwise trade to the
/// nearer edge. Immutable once built.
class Policy {
 public:
  /// u(p) = p + width / 2, l(p) = p - width / 2.
  static Policy constant_band(double width);
  /// Linear interpolation of a solved band curve (at least two nodes).
  static Policy analytic_band(const BandCurve& curve);

  Edges edges_at(double p) const;
  double apply(double pi_prev, double p) const;

  const std::string& description() const { return description_; }
  bool is_constant() const { return std::holds_alternative<Constant>(kind_); }

 private:
  struct Constant {
    double half_width;
  };
  struct Analytic {
    std::vector<double> p;
    std::vector<double> lower;
    std::vector<double> upper;
    double first_spacing;
    double last_spacing;
    double uniform_step;  // 0 when the grid is not uniform
  };

  Policy(std::variant<Constant, Analytic> kind, std::string description)
      : kind_(std::move(kind)), description_(std::move(description)) {}

  std::variant<Constant, Analytic> kind_;
  std::string description_;
};

/// clamp(pi_prev, l(p), u(p)).
double apply_policy(double pi_prev, double p, const Policy& policy);

struct PnlStep {
  double gain = 0.0;  // p pi
  double risk = 0.0;  // pi^2 / 2
  double cost = 0.0;  // Gamma |pi - pi_prev|
};

PnlStep pnl_step(double pi, double pi_prev, double p, const CostParams& costs);

/// Monte Carlo estimate of the total per-path PnL of a policy.
struct SimResult {
  double mean_pnl = 0.0;
  double std_error = 0.0;  // sample std of per-path totals / sqrt(n_paths)
  std::size_t n_paths = 0;
  std::size_t path_length = 0;  // trading steps per path
  double mean_gain = 0.0;
  double mean_risk = 0.0;
  double mean_cost = 0.0;
};

/// n_paths paths of path_length steps (path_length + 1 predictor values,
/// p_0 = 0), path i seeded with path_seed(seed, i).
std::vector<PredictorPath> sample_paths(const OuParams& params, std::size_t n_paths,
                                        std::size_t path_length, std::uint64_t seed);

/// Runs the policy over pre-sampled paths with pi_0 = 0. Paths are processed
/// in parallel (see simulation_threads) and reduced in path order, so the
/// result does not depend on the thread count.
SimResult evaluate_policy(const Policy& policy, std::span<const PredictorPath> paths,
                          const CostParams& costs);

SimResult simulate(const Policy& policy, const OuParams& params, const CostParams& costs,
                   std::size_t n_paths, std::size_t path_length, std::uint64_t seed);

/// Worker threads for path-parallel loops: TRADEBAND_THREADS if set, else the
/// hardware concurrency.
unsigned simulation_threads();

struct GridSearchResult {
  double best_width = 0.0;
  SimResult result;  // winner re-evaluated on the evaluation paths
  std::vector<double> candidates;
  std::vector<double> training_means;
};

/// Seed of the training set used by grid_search_constant_band; disjoint from
/// the evaluation paths derived from `seed`.
std::uint64_t training_seed(std::uint64_t seed);

/// Picks the constant width with the best mean PnL on the training paths
/// (ties toward the larger width) and reports it on the evaluation paths.
GridSearchResult grid_search_constant_band(std::span<const double> candidates,
                                           std::span<const PredictorPath> training,
                                           std::span<const PredictorPath> evaluation,
                                           const CostParams& costs);

GridSearchResult grid_search_constant_band(const OuParams& params, const CostParams& costs,
                                           std::span<const double> candidates,
                                           std::size_t n_paths, std::size_t path_length,
                                           std::uint64_t seed);

/// 60 log-spaced widths over [1e-3, 20] sigma_p plus `analytic_width`.
std::vector<double> default_width_candidates(const OuParams& params, double analytic_width);

/// Predictor grid of the analytic policy: `nodes` points over +-span_sigma sigma_p.
std::vector<double> analytic_grid(const OuParams& params, std::size_t nodes = 401,
                                  double span_sigma = 8.0);

struct ComparisonRow {
  double ratio = 0.0;
  SimResult optimal;
  SimResult grid;
  double best_width = 0.0;
};

/// Optimal band against the grid-searched constant band on identical
/// evaluation paths.
ComparisonRow compare(const OuParams& params, const CostParams& costs, std::size_t n_paths,
                      std::size_t path_length, std::uint64_t seed);

}  // namespace tradeband
