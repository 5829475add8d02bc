#include "tradeband/policy_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

namespace tradeband {
namespace {

struct PathTotals {
  double gain = 0.0;
  double risk = 0.0;
  double cost = 0.0;
};

PathTotals run_path(const Policy& policy, const PredictorPath& path, double gamma) {
  PathTotals totals;
  double pi = 0.0;
  const auto& p = path.values;
  for (std::size_t t = 1; t < p.size(); ++t) {
    const double next = policy.apply(pi, p[t]);
    totals.gain += p[t] * next;
    totals.risk += 0.5 * next * next;
    totals.cost += gamma * std::fabs(next - pi);
    pi = next;
  }
  return totals;
}

// Runs fn(i) for i in [0, n) over the simulation thread pool.
template <class Fn>
void parallel_for(std::size_t n, Fn fn) {
  const std::size_t workers = std::min<std::size_t>(simulation_threads(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
}

std::string format_width(double width) {
  std::ostringstream os;
  os << "constant band B=" << width;
  return os.str();
}

}  // namespace

Policy Policy::constant_band(double width) {
  if (!(width >= 0.0) || !std::isfinite(width)) {
    throw std::invalid_argument("constant_band: width must be finite and >= 0");
  }
  return Policy(Constant{0.5 * width}, format_width(width));
}

Policy Policy::analytic_band(const BandCurve& curve) {
  const auto& pts = curve.points;
  if (pts.size() < 2) throw std::invalid_argument("analytic_band: need at least two nodes");
  Analytic a;
  a.p.reserve(pts.size());
  a.lower.reserve(pts.size());
  a.upper.reserve(pts.size());
  for (const auto& pt : pts) {
    a.p.push_back(pt.p);
    a.lower.push_back(pt.lower);
    a.upper.push_back(pt.upper);
  }
  a.first_spacing = a.p[1] - a.p[0];
  a.last_spacing = a.p.back() - a.p[a.p.size() - 2];
  const double step = (a.p.back() - a.p.front()) / static_cast<double>(a.p.size() - 1);
  a.uniform_step = step;
  for (std::size_t i = 0; i < a.p.size(); ++i) {
    const double expected = a.p.front() + step * static_cast<double>(i);
    if (std::fabs(a.p[i] - expected) > 1e-9 * step) {
      a.uniform_step = 0.0;
      break;
    }
  }
  std::ostringstream os;
  os << "analytic band (ratio " << cost_ratio(curve.params, curve.costs) << ", "
     << pts.size() << " nodes)";
  return Policy(std::move(a), os.str());
}

Edges Policy::edges_at(double p) const {
  if (const auto* c = std::get_if<Constant>(&kind_)) {
    return {p - c->half_width, p + c->half_width};
  }
  const auto& a = std::get<Analytic>(kind_);
  const std::size_t n = a.p.size();
  if (p < a.p.front() - a.first_spacing || p > a.p.back() + a.last_spacing) {
    std::ostringstream os;
    os << "analytic band queried at p = " << p << ", outside [" << a.p.front() << ", "
       << a.p.back() << "] by more than one spacing";
    throw ExtrapolationError(os.str());
  }
  std::size_t i;
  if (a.uniform_step > 0.0) {
    const double x = (p - a.p.front()) / a.uniform_step;
    i = x <= 0.0 ? 0 : std::min(static_cast<std::size_t>(x), n - 2);
  } else {
    const auto it = std::upper_bound(a.p.begin(), a.p.end(), p);
    i = it == a.p.begin() ? 0 : std::min<std::size_t>(it - a.p.begin() - 1, n - 2);
  }
  const double w = (p - a.p[i]) / (a.p[i + 1] - a.p[i]);
  return {a.lower[i] + w * (a.lower[i + 1] - a.lower[i]),
          a.upper[i] + w * (a.upper[i + 1] - a.upper[i])};
}

double Policy::apply(double pi_prev, double p) const {
  const Edges e = edges_at(p);
  return std::clamp(pi_prev, e.lower, e.upper);
}

double apply_policy(double pi_prev, double p, const Policy& policy) {
  return policy.apply(pi_prev, p);
}

PnlStep pnl_step(double pi, double pi_prev, double p, const CostParams& costs) {
  return {p * pi, 0.5 * pi * pi, costs.gamma * std::fabs(pi - pi_prev)};
}

unsigned simulation_threads() {
  if (const char* env = std::getenv("TRADEBAND_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<PredictorPath> sample_paths(const OuParams& params, std::size_t n_paths,
                                        std::size_t path_length, std::uint64_t seed) {
  std::vector<PredictorPath> paths(n_paths);
  parallel_for(n_paths, [&](std::size_t i) {
    paths[i] = sample_path(params, 0.0, path_length + 1, path_seed(seed, i));
  });
  return paths;
}

SimResult evaluate_policy(const Policy& policy, std::span<const PredictorPath> paths,
                          const CostParams& costs) {
  if (paths.size() < 2) throw std::invalid_argument("evaluate_policy: need at least 2 paths");
  std::vector<PathTotals> totals(paths.size());
  parallel_for(paths.size(),
               [&](std::size_t i) { totals[i] = run_path(policy, paths[i], costs.gamma); });

  const double n = static_cast<double>(paths.size());
  SimResult r;
  r.n_paths = paths.size();
  r.path_length = paths.front().values.size() - 1;
  double sum = 0.0;
  for (const auto& t : totals) {
    r.mean_gain += t.gain;
    r.mean_risk += t.risk;
    r.mean_cost += t.cost;
    sum += t.gain - t.risk - t.cost;
  }
  r.mean_gain /= n;
  r.mean_risk /= n;
  r.mean_cost /= n;
  r.mean_pnl = sum / n;
  double ss = 0.0;
  for (const auto& t : totals) {
    const double d = (t.gain - t.risk - t.cost) - r.mean_pnl;
    ss += d * d;
  }
  r.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return r;
}

SimResult simulate(const Policy& policy, const OuParams& params, const CostParams& costs,
                   std::size_t n_paths, std::size_t path_length, std::uint64_t seed) {
  params.validate();
  costs.validate();
  if (n_paths < 2) throw std::invalid_argument("simulate: n_paths must be >= 2");
  const auto paths = sample_paths(params, n_paths, path_length, seed);
  return evaluate_policy(policy, paths, costs);
}

std::uint64_t training_seed(std::uint64_t seed) { return splitmix64(seed ^ 0x5452414e4b4559ULL); }

GridSearchResult grid_search_constant_band(std::span<const double> candidates,
                                           std::span<const PredictorPath> training,
                                           std::span<const PredictorPath> evaluation,
                                           const CostParams& costs) {
  if (candidates.empty()) throw std::invalid_argument("grid search: no candidate widths");
  GridSearchResult out;
  out.candidates.assign(candidates.begin(), candidates.end());
  double best_mean = -std::numeric_limits<double>::infinity();
  for (double width : candidates) {
    if (!(width >= 0.0)) throw std::invalid_argument("grid search: negative candidate width");
    const double mean = evaluate_policy(Policy::constant_band(width), training, costs).mean_pnl;
    out.training_means.push_back(mean);
    if (mean > best_mean || (mean == best_mean && width > out.best_width)) {
      best_mean = mean;
      out.best_width = width;
    }
  }
  out.result = evaluate_policy(Policy::constant_band(out.best_width), evaluation, costs);
  return out;
}

GridSearchResult grid_search_constant_band(const OuParams& params, const CostParams& costs,
                                           std::span<const double> candidates,
                                           std::size_t n_paths, std::size_t path_length,
                                           std::uint64_t seed) {
  params.validate();
  costs.validate();
  const auto training = sample_paths(params, n_paths, path_length, training_seed(seed));
  const auto evaluation = sample_paths(params, n_paths, path_length, seed);
  return grid_search_constant_band(candidates, training, evaluation, costs);
}

std::vector<double> default_width_candidates(const OuParams& params, double analytic_width) {
  const double sigma = stationary_std(params);
  constexpr int kCount = 60;
  const double lo = std::log(1e-3 * sigma);
  const double hi = std::log(20.0 * sigma);
  std::vector<double> widths;
  widths.reserve(kCount + 1);
  for (int i = 0; i < kCount; ++i) {
    widths.push_back(std::exp(lo + (hi - lo) * i / (kCount - 1)));
  }
  widths.push_back(analytic_width);
  std::sort(widths.begin(), widths.end());
  return widths;
}

std::vector<double> analytic_grid(const OuParams& params, std::size_t nodes, double span_sigma) {
  if (nodes < 2) throw std::invalid_argument("analytic_grid: need at least two nodes");
  const double span = span_sigma * stationary_std(params);
  std::vector<double> grid(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    grid[i] = -span + 2.0 * span * static_cast<double>(i) / static_cast<double>(nodes - 1);
  }
  // Odd node count puts the middle node exactly at zero.
  if (nodes % 2 == 1) grid[nodes / 2] = 0.0;
  return grid;
}

ComparisonRow compare(const OuParams& params, const CostParams& costs, std::size_t n_paths,
                      std::size_t path_length, std::uint64_t seed) {
  params.validate();
  costs.validate();
  ComparisonRow row;
  row.ratio = cost_ratio(params, costs);

  const auto grid = analytic_grid(params);
  const BandCurve curve = band_curve(grid, params, costs);
  const Policy optimal = Policy::analytic_band(curve);
  const auto& mid = curve.points[curve.points.size() / 2];
  const auto candidates = default_width_candidates(params, mid.upper - mid.lower);

  const auto training = sample_paths(params, n_paths, path_length, training_seed(seed));
  const auto evaluation = sample_paths(params, n_paths, path_length, seed);
  const GridSearchResult search =
      grid_search_constant_band(candidates, training, evaluation, costs);
  row.grid = search.result;
  row.best_width = search.best_width;
  row.optimal = evaluate_policy(optimal, evaluation, costs);
  return row;
}

}  // namespace tradeband
