#include "tradeband_cli/commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tradeband/band_solver.hpp"
#include "tradeband/dp_oracle.hpp"
#include "tradeband/policy_sim.hpp"

namespace tradeband::cli {
namespace {

using nlohmann::ordered_json;

constexpr std::uint64_t kDefaultSeed = 20240601;

struct Common {
  double epsilon = 0.01;
  double beta = 0.01;
  std::optional<double> gamma;
  std::optional<double> ratio;
  std::uint64_t seed = kDefaultSeed;
  std::string out;
  bool quiet = false;
  bool json = false;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Context {
 public:
  Context(const Common& common, std::string command, std::ostream& out, std::ostream& err)
      : common_(common), out_(out), err_(err) {
    params_ = OuParams{common.epsilon, common.beta};
    params_.validate();
    if (common.ratio) {
      costs_ = costs_for_ratio(*common.ratio, params_);
    } else if (common.gamma) {
      costs_ = CostParams{*common.gamma};
    } else {
      costs_ = costs_for_ratio(0.1, params_);
    }
    costs_.validate();
    config_["command"] = std::move(command);
    config_["epsilon"] = params_.epsilon;
    config_["beta"] = params_.beta;
    config_["gamma"] = costs_.gamma;
    config_["ratio"] = cost_ratio(params_, costs_);
    config_["seed"] = common.seed;
  }

  const OuParams& params() const { return params_; }
  const CostParams& costs() const { return costs_; }
  std::uint64_t seed() const { return common_.seed; }
  bool json() const { return common_.json; }
  ordered_json& config() { return config_; }

  std::ostream& log() {
    if (common_.quiet) {
      null_.setstate(std::ios::badbit);
      return null_;
    }
    return err_;
  }

  /// Writes `text` to --out if given, otherwise to the data stream.
  void emit(const std::string& text, const std::string& path = {}) {
    const std::string& target = path.empty() ? common_.out : path;
    if (target.empty()) {
      out_ << text;
      return;
    }
    std::ofstream file(target);
    if (!file) throw std::runtime_error("cannot open output file " + target);
    file << text;
    log() << "wrote " << target << "\n";
  }

  /// Commented header of every CSV: the resolved configuration.
  std::string csv_header() const {
    std::ostringstream s;
    s << std::setprecision(17);
    for (const auto& [key, value] : config_.items()) s << "# " << key << "=" << scalar(value) << "\n";
    return s.str();
  }

  std::string document(ordered_json data) const {
    ordered_json doc;
    doc["config"] = config_;
    doc["data"] = std::move(data);
    return doc.dump(2) + "\n";
  }

 private:
  static std::string scalar(const ordered_json& v) {
    return v.is_string() ? v.get<std::string>() : v.dump();
  }

  Common common_;
  OuParams params_;
  CostParams costs_;
  ordered_json config_;
  std::ostream& out_;
  std::ostream& err_;
  std::ostringstream null_;
};

std::string fmt(double x) {
  std::ostringstream s;
  s << std::setprecision(17) << x;
  return s.str();
}

ordered_json sim_json(double ratio, const std::string& policy, const SimResult& r,
                      std::uint64_t seed) {
  ordered_json row;
  row["ratio"] = ratio;
  row["policy"] = policy;
  row["mean_pnl"] = r.mean_pnl;
  row["stderr"] = r.std_error;
  row["mean_gain"] = r.mean_gain;
  row["mean_risk"] = r.mean_risk;
  row["mean_cost"] = r.mean_cost;
  row["n_paths"] = r.n_paths;
  row["path_length"] = r.path_length;
  row["seed"] = seed;
  return row;
}

std::string sim_csv(const ordered_json& rows) {
  std::ostringstream s;
  s << "ratio,policy,mean_pnl,stderr,mean_gain,mean_risk,mean_cost,n_paths,path_length,seed\n";
  for (const auto& r : rows) {
    s << fmt(r["ratio"].get<double>()) << "," << r["policy"].get<std::string>() << ","
      << fmt(r["mean_pnl"].get<double>()) << "," << fmt(r["stderr"].get<double>()) << ","
      << fmt(r["mean_gain"].get<double>()) << "," << fmt(r["mean_risk"].get<double>()) << ","
      << fmt(r["mean_cost"].get<double>()) << "," << r["n_paths"].get<std::size_t>() << ","
      << r["path_length"].get<std::size_t>() << "," << r["seed"].get<std::uint64_t>() << "\n";
  }
  return s.str();
}

// ---------------------------------------------------------------------------

int cmd_solve(Context& ctx, double p) {
  ctx.config()["p"] = p;
  const auto lower = solve_p2(p, ctx.params(), ctx.costs());
  const auto upper = solve_p1(p, ctx.params(), ctx.costs());
  ordered_json data;
  data["p"] = p;
  data["lower"] = lower.edge;
  data["upper"] = upper.edge;
  data["lower_partner_p2"] = lower.p2;
  data["upper_partner_p1"] = upper.p1;
  data["p_over_sigma"] = p / stationary_std(ctx.params());
  data["ratio"] = cost_ratio(ctx.params(), ctx.costs());
  data["discrete_regime"] = lower.discrete_regime || upper.discrete_regime;
  if (lower.discrete_regime || upper.discrete_regime) {
    ctx.log() << "warning: epsilon |p| > Gamma, the band is expected to saturate at 2 Gamma\n";
  }
  if (ctx.json()) {
    ctx.emit(ctx.document(data));
    return kOk;
  }
  std::ostringstream s;
  s << ctx.csv_header();
  for (const auto& [key, value] : data.items()) {
    s << key << " " << (value.is_boolean() ? value.dump() : fmt(value.get<double>())) << "\n";
  }
  ctx.emit(s.str());
  return kOk;
}

int cmd_band(Context& ctx, std::size_t points, double span_sigma) {
  if (points == 0) throw UsageError("band: --points must be positive");
  if (!(span_sigma > 0)) throw UsageError("band: --span-sigma must be positive");
  ctx.config()["points"] = points;
  ctx.config()["span_sigma"] = span_sigma;
  const std::vector<double> grid =
      points == 1 ? std::vector<double>{0.0} : analytic_grid(ctx.params(), points, span_sigma);
  const auto curve = band_curve(grid, ctx.params(), ctx.costs());
  if (curve.discrete_regime_points > 0) {
    ctx.log() << "warning: " << curve.discrete_regime_points
              << " grid points have epsilon |p| > Gamma\n";
  }
  const double sigma = stationary_std(ctx.params());
  if (ctx.json()) {
    ordered_json rows = ordered_json::array();
    for (const auto& pt : curve.points) {
      rows.push_back({{"p", pt.p},
                      {"p_over_sigma", pt.p / sigma},
                      {"lower", pt.lower},
                      {"upper", pt.upper},
                      {"lower_over_sigma", pt.lower / sigma},
                      {"upper_over_sigma", pt.upper / sigma}});
    }
    ctx.emit(ctx.document(rows));
    return kOk;
  }
  std::ostringstream s;
  s << ctx.csv_header() << "p,p_over_sigma,lower,upper,lower_over_sigma,upper_over_sigma\n";
  for (const auto& pt : curve.points) {
    s << fmt(pt.p) << "," << fmt(pt.p / sigma) << "," << fmt(pt.lower) << "," << fmt(pt.upper)
      << "," << fmt(pt.lower / sigma) << "," << fmt(pt.upper / sigma) << "\n";
  }
  ctx.emit(s.str());
  return kOk;
}

struct SimOptions {
  std::string policy = "optimal";
  double width_sigma = 1.0;
  std::size_t n_paths = 100;
  std::size_t path_length = 50000;
  std::string paths_out;
};

int cmd_simulate(Context& ctx, const SimOptions& o) {
  if (o.policy != "optimal" && o.policy != "constant") {
    throw UsageError("simulate: --policy must be optimal or constant");
  }
  ctx.config()["policy"] = o.policy;
  if (o.policy == "constant") ctx.config()["width_sigma"] = o.width_sigma;
  ctx.config()["n_paths"] = o.n_paths;
  ctx.config()["path_length"] = o.path_length;
  const auto paths = sample_paths(ctx.params(), o.n_paths, o.path_length, ctx.seed());
  const Policy policy =
      o.policy == "constant"
          ? Policy::constant_band(o.width_sigma * stationary_std(ctx.params()))
          : Policy::analytic_band(band_curve(analytic_grid(ctx.params()), ctx.params(), ctx.costs()));
  const auto result = evaluate_policy(policy, paths, ctx.costs());
  ctx.log() << policy.description() << ": mean PnL " << result.mean_pnl << " (" << result.std_error
            << ")\n";
  if (!o.paths_out.empty()) {
    std::ostringstream s;
    s << ctx.csv_header() << "# path=0\nt,p\n";
    const auto& values = paths.front().values;
    for (std::size_t t = 0; t < values.size(); ++t) s << t << "," << fmt(values[t]) << "\n";
    ctx.emit(s.str(), o.paths_out);
  }
  ordered_json rows = ordered_json::array();
  rows.push_back(sim_json(cost_ratio(ctx.params(), ctx.costs()), o.policy, result, ctx.seed()));
  ctx.emit(ctx.json() ? ctx.document(rows) : ctx.csv_header() + sim_csv(rows));
  return kOk;
}

struct CompareOptions {
  std::vector<double> ratios = {0.01, 0.1, 0.15, 0.2, 0.3, 0.5};
  std::size_t n_paths = 100;
  std::size_t path_length = 50000;
};

int cmd_compare(Context& ctx, const CompareOptions& o) {
  if (o.ratios.empty()) throw UsageError("compare: --ratios is empty");
  ctx.config()["ratios"] = o.ratios;
  ctx.config()["n_paths"] = o.n_paths;
  ctx.config()["path_length"] = o.path_length;
  ctx.config().erase("gamma");
  ctx.config().erase("ratio");
  ordered_json rows = ordered_json::array();
  for (double ratio : o.ratios) {
    const auto row = compare(ctx.params(), costs_for_ratio(ratio, ctx.params()), o.n_paths,
                             o.path_length, ctx.seed());
    ctx.log() << "ratio " << ratio << ": optimal " << row.optimal.mean_pnl << " ("
              << row.optimal.std_error << "), grid " << row.grid.mean_pnl << " ("
              << row.grid.std_error << ") at width " << row.best_width << "\n";
    rows.push_back(sim_json(ratio, "optimal", row.optimal, ctx.seed()));
    rows.push_back(sim_json(ratio, "grid", row.grid, ctx.seed()));
  }
  ctx.emit(ctx.json() ? ctx.document(rows) : ctx.csv_header() + sim_csv(rows));
  return kOk;
}

int cmd_verify(Context& ctx, const std::string& level, const VerifyOptions& base) {
  if (level != "fast" && level != "full") throw UsageError("verify: --level must be fast or full");
  VerifyOptions options = base;
  options.full = level == "full";
  if (!(options.tolerance_scale > 0)) throw UsageError("verify: --tolerance-scale must be positive");
  ctx.config()["level"] = level;
  ctx.config()["tolerance_scale"] = options.tolerance_scale;
  if (options.full) ctx.config()["dp_cells"] = options.dp_cells;
  const auto checks = run_verify(ctx.params(), ctx.costs(), options);
  ordered_json report = ordered_json::array();
  bool ok = true;
  for (const auto& c : checks) {
    ok = ok && c.passed;
    ctx.log() << (c.passed ? "PASS " : "FAIL ") << c.name << " " << c.value << " <= " << c.threshold
              << (c.detail.empty() ? "" : "  " + c.detail) << "\n";
    report.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"value", c.value},
                      {"threshold", c.threshold},
                      {"detail", c.detail}});
  }
  ordered_json data;
  data["passed"] = ok;
  data["checks"] = report;
  ctx.emit(ctx.document(data));
  return ok ? kOk : kFailure;
}

struct DpOptions {
  double n_sigma = 8.0;
  std::size_t n_p = 201;
  double pi_span_sigma = 6.0;
  std::size_t n_pi = 601;
  std::size_t horizon = 20000;
  std::string bounds_out;
};

int cmd_dp_dump(Context& ctx, const DpOptions& o) {
  ctx.config()["n_sigma"] = o.n_sigma;
  ctx.config()["n_p"] = o.n_p;
  ctx.config()["pi_span_sigma"] = o.pi_span_sigma;
  ctx.config()["n_pi"] = o.n_pi;
  ctx.config()["horizon"] = o.horizon;
  const auto grid = build_grid(ctx.params(), o.n_sigma, o.n_p, o.pi_span_sigma, o.n_pi);
  const auto sol = backward_induction(grid, ctx.costs(), o.horizon);
  ctx.log() << "backward induction: " << sol.steps << " steps, "
            << (sol.converged ? "converged" : "NOT converged") << "\n";
  std::ostringstream s;
  s << ctx.csv_header() << "# steps=" << sol.steps << "\n# converged=" << sol.converged << "\n";
  s << "p,pi,V\n";
  for (std::size_t j = 0; j < sol.n_p(); ++j) {
    for (std::size_t i = 0; i < sol.n_pi(); ++i) {
      s << fmt(grid.p_values[j]) << "," << fmt(grid.pi_values[i]) << "," << fmt(sol.v(j, i)) << "\n";
    }
  }
  ctx.emit(s.str());
  if (!o.bounds_out.empty()) {
    std::ostringstream b;
    b << ctx.csv_header() << "p,lower,upper\n";
    for (const auto& nt : sol.no_trade) {
      b << fmt(nt.p) << "," << fmt(nt.lower) << "," << fmt(nt.upper) << "\n";
    }
    ctx.emit(b.str(), o.bounds_out);
  }
  return sol.converged ? kOk : kFailure;
}

void add_common(CLI::App& app, Common& c) {
  app.add_option("--epsilon", c.epsilon, "Mean-reversion rate per step")->capture_default_str();
  app.add_option("--beta", c.beta, "Predictor noise per step")->capture_default_str();
  app.add_option("--gamma", c.gamma, "Linear cost per unit traded");
  app.add_option("--ratio", c.ratio, "Gamma eps^{3/2} / beta, overrides --gamma");
  app.add_option("--seed", c.seed, "Base seed of the simulated paths")->capture_default_str();
  app.add_option("--out", c.out, "Data file (default: standard output)");
  app.add_flag("--quiet", c.quiet, "No progress text on standard error");
  app.add_flag("--json", c.json, "JSON instead of CSV");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimal no-trade band for an Ornstein-Uhlenbeck predictor", "tradeband-cli"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value or TOML file with flag names as keys");
  Common common;
  add_common(app, common);
  app.fallthrough();

  double solve_p = 0.0;
  auto* solve = app.add_subcommand("solve", "Band edges at one predictor value");
  solve->add_option("--p", solve_p, "Predictor value")->capture_default_str();

  std::size_t band_points = 401;
  double band_span = 8.0;
  auto* band = app.add_subcommand("band", "Band curve on a uniform predictor grid");
  band->add_option("--points", band_points, "Grid nodes")->capture_default_str();
  band->add_option("--span-sigma", band_span, "Half-span in stationary std")->capture_default_str();

  SimOptions sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo PnL of one policy");
  simulate_cmd->add_option("--policy", sim.policy, "optimal or constant")->capture_default_str();
  simulate_cmd->add_option("--width-sigma", sim.width_sigma, "Constant band width in stationary std")
      ->capture_default_str();
  simulate_cmd->add_option("--n-paths", sim.n_paths)->capture_default_str();
  simulate_cmd->add_option("--path-length", sim.path_length)->capture_default_str();
  simulate_cmd->add_option("--paths-out", sim.paths_out, "CSV of the first predictor path");

  CompareOptions cmp;
  auto* compare_cmd = app.add_subcommand("compare", "Optimal band against a grid-searched constant band");
  compare_cmd->add_option("--ratios", cmp.ratios)->delimiter(',')->capture_default_str();
  compare_cmd->add_option("--n-paths", cmp.n_paths)->capture_default_str();
  compare_cmd->add_option("--path-length", cmp.path_length)->capture_default_str();

  std::string level = "fast";
  VerifyOptions verify_options;
  auto* verify = app.add_subcommand("verify", "Self-checks with a JSON report");
  verify->add_option("--level", level, "fast or full (adds the DP oracle)")->capture_default_str();
  verify->add_option("--tolerance-scale", verify_options.tolerance_scale)->capture_default_str();
  verify->add_option("--dp-cells", verify_options.dp_cells, "Allowed DP edge distance in cells")
      ->capture_default_str();

  DpOptions dp;
  auto* dump = app.add_subcommand("dp-dump", "Value function of the DP oracle as CSV");
  dump->add_option("--n-sigma", dp.n_sigma)->capture_default_str();
  dump->add_option("--n-p", dp.n_p)->capture_default_str();
  dump->add_option("--pi-span-sigma", dp.pi_span_sigma)->capture_default_str();
  dump->add_option("--n-pi", dp.n_pi)->capture_default_str();
  dump->add_option("--horizon", dp.horizon)->capture_default_str();
  dump->add_option("--bounds-out", dp.bounds_out, "CSV of the no-trade intervals");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (solve->parsed()) {
      Context ctx(common, "solve", out, err);
      return cmd_solve(ctx, solve_p);
    }
    if (band->parsed()) {
      Context ctx(common, "band", out, err);
      return cmd_band(ctx, band_points, band_span);
    }
    if (simulate_cmd->parsed()) {
      Context ctx(common, "simulate", out, err);
      return cmd_simulate(ctx, sim);
    }
    if (compare_cmd->parsed()) {
      Context ctx(common, "compare", out, err);
      return cmd_compare(ctx, cmp);
    }
    if (verify->parsed()) {
      Context ctx(common, "verify", out, err);
      return cmd_verify(ctx, level, verify_options);
    }
    if (dump->parsed()) {
      Context ctx(common, "dp-dump", out, err);
      return cmd_dp_dump(ctx, dp);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

}  // namespace tradeband::cli
