#include "tradeband/dp_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tradeband {
namespace {

// max_{i'} [v[i'] - c |i' - i|] and its argmax, preferring i' = i on ties.
void l1_max_convolution(const double* v, std::size_t n, double c, double* out,
                        std::size_t* arg) {
  std::vector<double> left(n);
  std::vector<std::size_t> left_arg(n);
  left[0] = v[0];
  left_arg[0] = 0;
  for (std::size_t i = 1; i < n; ++i) {
    const double carried = left[i - 1] - c;
    if (carried > v[i]) {
      left[i] = carried;
      left_arg[i] = left_arg[i - 1];
    } else {
      left[i] = v[i];
      left_arg[i] = i;
    }
  }
  double right = v[n - 1];
  std::size_t right_arg = n - 1;
  for (std::size_t k = n; k-- > 0;) {
    if (k < n - 1) {
      const double carried = right - c;
      if (carried > v[k]) {
        right = carried;
      } else {
        right = v[k];
        right_arg = k;
      }
    }
    if (right > left[k]) {
      out[k] = right;
      if (arg) arg[k] = right_arg;
    } else {
      out[k] = left[k];
      if (arg) arg[k] = left_arg[k];
    }
  }
}

std::vector<NoTradeInterval> intervals_from_policy(const DpGrid& grid,
                                                   const std::vector<std::size_t>& policy,
                                                   bool require_contiguous) {
  const std::size_t n_pi = grid.pi_values.size();
  std::vector<NoTradeInterval> out(grid.p_values.size());
  for (std::size_t j = 0; j < grid.p_values.size(); ++j) {
    const std::size_t* row = &policy[j * n_pi];
    std::size_t lo = n_pi, hi = 0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n_pi; ++i) {
      if (row[i] == i) {
        lo = std::min(lo, i);
        hi = std::max(hi, i);
        ++count;
      }
    }
    if (count == 0) {
      throw std::runtime_error("dp oracle: empty no-trade zone");
    }
    if (require_contiguous && count != hi - lo + 1) {
      throw std::runtime_error("dp oracle: no-trade zone is not contiguous");
    }
    out[j] = {grid.p_values[j], grid.pi_values[lo], grid.pi_values[hi], lo, hi};
  }
  return out;
}

}  // namespace

DpGrid build_grid(const OuParams& params, double n_sigma, std::size_t n_p, double pi_span_sigma,
                  std::size_t n_pi) {
  params.validate();
  if (n_p < 3 || n_pi < 3) throw std::invalid_argument("build_grid: need at least 3 nodes");
  if (!(n_sigma >= 4.0)) throw std::invalid_argument("build_grid: n_sigma must be >= 4");
  if (!(pi_span_sigma > 0.0)) throw std::invalid_argument("build_grid: position span must be > 0");

  const double sigma = stationary_std(params);
  DpGrid grid;
  grid.params = params;
  const double p_span = n_sigma * sigma;
  grid.dp = 2.0 * p_span / static_cast<double>(n_p - 1);
  if (params.beta < grid.dp) {
    throw std::invalid_argument("build_grid: predictor kernel under-resolved (beta < dp)");
  }
  const double pi_span = pi_span_sigma * sigma;
  grid.dpi = 2.0 * pi_span / static_cast<double>(n_pi - 1);

  grid.p_values.resize(n_p);
  for (std::size_t j = 0; j < n_p; ++j) grid.p_values[j] = -p_span + grid.dp * j;
  if (n_p % 2 == 1) grid.p_values[n_p / 2] = 0.0;
  grid.pi_values.resize(n_pi);
  for (std::size_t i = 0; i < n_pi; ++i) grid.pi_values[i] = -pi_span + grid.dpi * i;
  if (n_pi % 2 == 1) grid.pi_values[n_pi / 2] = 0.0;

  constexpr double kLogCutoff = 40.0;
  const double inv_var = 1.0 / (params.beta * params.beta);
  grid.transition.resize(n_p);
  for (std::size_t j = 0; j < n_p; ++j) {
    const double mean = (1.0 - params.epsilon) * grid.p_values[j];
    TransitionRow& row = grid.transition[j];
    std::vector<double> dense(n_p);
    std::size_t first = n_p, last = 0;
    for (std::size_t k = 0; k < n_p; ++k) {
      const double z = grid.p_values[k] - mean;
      const double exponent = 0.5 * z * z * inv_var;
      if (exponent < kLogCutoff) {
        dense[k] = std::exp(-exponent);
        first = std::min(first, k);
        last = std::max(last, k);
      }
    }
    if (first > last) throw std::logic_error("build_grid: empty transition row");
    row.first = first;
    row.weights.assign(dense.begin() + first, dense.begin() + last + 1);
    double total = 0.0;
    for (double w : row.weights) total += w;
    for (double& w : row.weights) w /= total;
  }
  return grid;
}

DpSolution backward_induction(const DpGrid& grid, const CostParams& costs, std::size_t horizon,
                              std::size_t stationary_window) {
  costs.validate();
  if (horizon < 1) throw std::invalid_argument("backward_induction: horizon must be >= 1");
  const std::size_t n_pi = grid.pi_values.size();
  const std::size_t n_p = grid.p_values.size();
  const double c = costs.gamma * grid.dpi;

  std::vector<double> current(n_p * n_pi, 0.0);
  std::vector<double> next(n_p * n_pi);
  std::vector<double> convolved(n_p * n_pi);
  std::vector<std::size_t> policy(n_p * n_pi);
  std::vector<NoTradeInterval> previous;

  DpSolution sol;
  sol.grid = grid;
  sol.costs = costs;
  std::size_t stable = 0;
  const std::size_t anchor = (n_p / 2) * n_pi + n_pi / 2;

  for (std::size_t h = 0; h < horizon; ++h) {
    for (std::size_t k = 0; k < n_p; ++k) {
      l1_max_convolution(&current[k * n_pi], n_pi, c, &convolved[k * n_pi], nullptr);
    }
    for (std::size_t j = 0; j < n_p; ++j) {
      double* out = &next[j * n_pi];
      const double p = grid.p_values[j];
      for (std::size_t i = 0; i < n_pi; ++i) {
        const double pi = grid.pi_values[i];
        out[i] = p * pi - 0.5 * pi * pi;
      }
      const TransitionRow& row = grid.transition[j];
      for (std::size_t m = 0; m < row.weights.size(); ++m) {
        const double w = row.weights[m];
        const double* src = &convolved[(row.first + m) * n_pi];
        for (std::size_t i = 0; i < n_pi; ++i) out[i] += w * src[i];
      }
    }
    // Undiscounted values grow linearly; only differences matter.
    const double shift = next[anchor];
    for (double& x : next) x -= shift;
    current.swap(next);
    sol.steps = h + 1;

    std::vector<double> scratch(n_pi);
    for (std::size_t j = 0; j < n_p; ++j) {
      l1_max_convolution(&current[j * n_pi], n_pi, c, scratch.data(), &policy[j * n_pi]);
    }
    auto intervals = intervals_from_policy(grid, policy, false);
    const bool same =
        !previous.empty() && std::equal(intervals.begin(), intervals.end(), previous.begin(),
                                        [](const NoTradeInterval& a, const NoTradeInterval& b) {
                                          return a.lower_index == b.lower_index &&
                                                 a.upper_index == b.upper_index;
                                        });
    stable = same ? stable + 1 : 0;
    previous = std::move(intervals);
    if (stable >= stationary_window) {
      sol.converged = true;
      break;
    }
  }

  sol.value = std::move(current);
  sol.policy = std::move(policy);
  sol.no_trade = extract_no_trade(sol);
  return sol;
}

std::vector<NoTradeInterval> extract_no_trade(const DpSolution& solution) {
  return intervals_from_policy(solution.grid, solution.policy, true);
}

StructureReport check_structure(const DpSolution& solution, double relative_tol) {
  StructureReport report;
  const std::size_t n_pi = solution.n_pi();
  const std::size_t n_p = solution.n_p();
  double max_abs = 0.0;
  for (double v : solution.value) max_abs = std::max(max_abs, std::fabs(v));
  report.concavity_tolerance = relative_tol * max_abs;
  report.worst_concavity = -std::numeric_limits<double>::infinity();

  const double pi_lo = solution.grid.pi_values.front();
  const double pi_hi = solution.grid.pi_values.back();
  for (std::size_t j = 0; j < n_p; ++j) {
    for (std::size_t i = 1; i + 1 < n_pi; ++i) {
      const double second = solution.v(j, i - 1) - 2.0 * solution.v(j, i) + solution.v(j, i + 1);
      report.worst_concavity = std::max(report.worst_concavity, second);
    }

    const std::size_t* row = &solution.policy[j * n_pi];
    std::size_t lo = n_pi, hi = 0;
    for (std::size_t i = 0; i < n_pi; ++i) {
      if (row[i] == i) {
        lo = std::min(lo, i);
        hi = std::max(hi, i);
      }
    }
    for (std::size_t i = 0; i < n_pi; ++i) {
      if (row[row[i]] != row[i]) ++report.idempotence_violations;
      if (i < lo && row[i] != lo) ++report.trade_to_edge_violations;
      if (i > hi && row[i] != hi) ++report.trade_to_edge_violations;
    }

    const double p = solution.grid.p_values[j];
    if (p >= pi_lo && p <= pi_hi) {
      const auto nearest = static_cast<std::size_t>(std::lround((p - pi_lo) / solution.grid.dpi));
      if (nearest < lo || nearest > hi) ++report.predictor_violations;
    }
  }
  report.concave = report.worst_concavity <= report.concavity_tolerance;
  report.idempotent = report.idempotence_violations == 0;
  report.trade_to_edge = report.trade_to_edge_violations == 0;
  report.predictor_inside = report.predictor_violations == 0;
  return report;
}

}  // namespace tradeband
