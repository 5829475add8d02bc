#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "tradeband/band_solver.hpp"
#include "tradeband/dp_oracle.hpp"
#include "tradeband/policy_sim.hpp"
#include "tradeband_cli/commands.hpp"

namespace tradeband::cli {
namespace {

VerifyCheck make_check(std::string name, double value, double threshold, std::string detail = {}) {
  VerifyCheck c;
  c.name = std::move(name);
  c.value = value;
  c.threshold = threshold;
  c.passed = std::isfinite(value) && value <= threshold;
  c.detail = std::move(detail);
  return c;
}

double upper_at(double p, const OuParams& params, const CostParams& costs) {
  return solve_p1(p, params, costs).edge;
}

double lower_at(double p, const OuParams& params, const CostParams& costs) {
  return solve_p2(p, params, costs).edge;
}

void cube_root(const OuParams& params, double scale, std::vector<VerifyCheck>& checks) {
  double worst = 0.0, previous = INFINITY;
  bool improving = true;
  std::ostringstream detail;
  for (double ratio : {1e-3, 1e-4, 1e-5}) {
    const auto costs = costs_for_ratio(ratio, params);
    const double rel = std::fabs(upper_at(0.0, params, costs) / asymptotic_small_p(costs, params) - 1);
    detail << "ratio " << ratio << ": " << rel << "; ";
    improving = improving && rel < previous;
    previous = rel;
    worst = std::max(worst, rel);
  }
  checks.push_back(make_check("cube_root_law", worst, 0.05 * scale, detail.str()));
  checks.push_back(make_check("cube_root_improves", improving ? 0.0 : 1.0, 0.0));
}

void large_gamma(const OuParams& params, double scale, std::vector<VerifyCheck>& checks) {
  const double limit = asymptotic_large_gamma_width(params);
  double previous = INFINITY, last = 0.0;
  bool approaching = true;
  std::ostringstream detail;
  for (double ratio : {5.0, 10.0, 20.0}) {
    const auto costs = costs_for_ratio(ratio, params);
    const double width = upper_at(0.0, params, costs) - lower_at(0.0, params, costs);
    last = std::fabs(width / limit - 1);
    detail << "ratio " << ratio << ": " << last << "; ";
    // Equal errors count as approaching once both sit at rounding level.
    approaching = approaching && (last < previous || last < 1e-12);
    previous = last;
  }
  checks.push_back(make_check("large_gamma_width", last, 0.05 * scale, detail.str()));
  checks.push_back(make_check("large_gamma_approach", approaching ? 0.0 : 1.0, 0.0));
}

void kolmogorov(const OuParams& params, double scale, std::vector<VerifyCheck>& checks) {
  double worst_residual = 0.0, worst_boundary = 0.0;
  for (double q1 : {-1.0, 0.0, 0.5, 1.5, 3.0}) {
    for (double gap : {0.2, 0.8, 1.5, 2.5, 4.0}) {
      EdgePair pair;
      pair.p1 = from_dimensionless(q1, params);
      pair.p2 = from_dimensionless(q1 - gap, params);
      for (int i = 1; i <= 20; ++i) {
        const double p = pair.p2 + (pair.p1 - pair.p2) * i / 21.0;
        const auto r = kolmogorov_residuals(p, pair, params);
        worst_residual = std::max(
            {worst_residual, std::fabs(r.gain), std::fabs(r.occupation), std::fabs(r.exit_low)});
      }
      const auto top = exit_functionals(pair.p1, pair, params);
      const auto bottom = exit_functionals(pair.p2, pair, params);
      worst_boundary = std::max({worst_boundary, std::fabs(top.gain), std::fabs(bottom.gain),
                                 std::fabs(top.occupation), std::fabs(bottom.occupation),
                                 std::fabs(top.exit_low), std::fabs(bottom.exit_low - 1.0)});
    }
  }
  checks.push_back(make_check("kolmogorov_residuals", worst_residual, 1e-4 * scale));
  checks.push_back(make_check("kolmogorov_boundaries", worst_boundary, 1e-8 * scale));
}

void invariants(const OuParams& params, const CostParams& costs, double scale,
                std::vector<VerifyCheck>& checks) {
  const double tol = kDefaultTolerance / std::sqrt(params.a());
  const auto grid = analytic_grid(params, 81, 6.0);
  const auto curve = band_curve(grid, params, costs);
  double containment = 0.0, symmetry = 0.0, duality = 0.0;
  const std::size_t n = curve.points.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& pt = curve.points[i];
    containment = std::max({containment, pt.lower - pt.p, pt.p - pt.upper});
    symmetry = std::max(symmetry, std::fabs(curve.points[n - 1 - i].lower + pt.upper));
    const auto down = solve_p2(pt.p, params, costs);
    const auto up = solve_p1(down.p2, params, costs);
    duality = std::max(duality, std::fabs(up.p1 - pt.p));
  }
  checks.push_back(make_check("band_containment", containment, 0.0));
  checks.push_back(make_check("odd_symmetry", symmetry, 10 * tol * scale));
  checks.push_back(make_check("duality_round_trip", duality, 10 * tol * scale));

  const OuParams other{params.epsilon / 2, params.beta * 3};
  const auto other_costs = costs_for_ratio(cost_ratio(params, costs), other);
  std::vector<double> grid_a, grid_b;
  for (int i = -20; i <= 20; ++i) {
    grid_a.push_back(from_dimensionless(0.25 * i, params));
    grid_b.push_back(from_dimensionless(0.25 * i, other));
  }
  const auto curve_a = band_curve(grid_a, params, costs);
  const auto curve_b = band_curve(grid_b, other, other_costs);
  double universality = 0.0;
  for (std::size_t i = 0; i < grid_a.size(); ++i) {
    const auto& a = curve_a.points[i];
    const auto& b = curve_b.points[i];
    universality = std::max({universality,
                             std::fabs(to_dimensionless(a.lower, params) - to_dimensionless(b.lower, other)),
                             std::fabs(to_dimensionless(a.upper, params) - to_dimensionless(b.upper, other))});
  }
  checks.push_back(make_check("universality", universality, 10 * kDefaultTolerance * scale));
}

void dp_oracle(const OuParams& params, const CostParams& costs, double scale, double cells,
               std::vector<VerifyCheck>& checks) {
  const auto grid = build_grid(params, 8.0, 201, 6.0, 601);
  const auto solution = backward_induction(grid, costs, 20000);
  checks.push_back(make_check("dp_converged", solution.converged ? 0.0 : 1.0, 0.0,
                              std::to_string(solution.steps) + " steps"));
  const auto report = check_structure(solution);
  checks.push_back(make_check("dp_concavity", report.worst_concavity,
                              report.concavity_tolerance * scale));
  checks.push_back(make_check("dp_idempotence", static_cast<double>(report.idempotence_violations), 0));
  checks.push_back(
      make_check("dp_trade_to_edge", static_cast<double>(report.trade_to_edge_violations), 0));
  checks.push_back(
      make_check("dp_predictor_inside", static_cast<double>(report.predictor_violations), 0));

  const double sigma = stationary_std(params);
  double worst = 0.0;
  std::ostringstream detail;
  for (double k : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
    const double p = k * sigma;
    const auto& nt = *std::min_element(
        solution.no_trade.begin(), solution.no_trade.end(),
        [p](const auto& a, const auto& b) { return std::fabs(a.p - p) < std::fabs(b.p - p); });
    const double lo = std::fabs(nt.lower - lower_at(nt.p, params, costs)) / grid.dpi;
    const double hi = std::fabs(nt.upper - upper_at(nt.p, params, costs)) / grid.dpi;
    detail << k << " sigma: " << lo << "/" << hi << " cells; ";
    worst = std::max({worst, lo, hi});
  }
  checks.push_back(make_check("dp_edges_match_solver", worst, cells * scale, detail.str()));
}

}  // namespace

std::vector<VerifyCheck> run_verify(const OuParams& params, const CostParams& costs,
                                    const VerifyOptions& options) {
  std::vector<VerifyCheck> checks;
  const double s = options.tolerance_scale;
  cube_root(params, s, checks);
  large_gamma(params, s, checks);
  kolmogorov(params, s, checks);
  invariants(params, costs, s, checks);
  if (options.full) dp_oracle(params, costs, s, options.dp_cells, checks);
  return checks;
}

}  // namespace tradeband::cli
