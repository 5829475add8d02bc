#include "tradeband/band_solver.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "tradeband/log_scaled.hpp"
#include "tradeband/special_functions.hpp"

namespace tradeband {
namespace {

constexpr double kMaxGap = 1e6;
constexpr int kMaxIterations = 200;
constexpr int kScanPoints = 8;
// 1 - phi varies on the scale 1 / (1 + max |q|). Intervals up to
// kShortInterval such units get a fixed Gauss-Legendre rule with
// kPanelDensity panels per unit; longer ones adaptive Gauss-Kronrod.
constexpr double kShortInterval = 4.0;
constexpr double kPanelDensity = 2.0;
constexpr unsigned kQuadratureDepth = 8;

// w * expm1(d) with w given as log w; stays finite when e^d alone would not.
double weighted_expm1(double log_w, double d) {
  if (d > 30.0) return std::exp(log_w + d + std::log1p(-std::exp(-d)));
  return std::exp(log_w) * std::expm1(d);
}

// log |e^z - 1|
double log_abs_expm1(double z) {
  if (z > 30.0) return z + std::log1p(-std::exp(-z));
  return std::log(std::fabs(std::expm1(z)));
}

// Brent's method on [lo, hi] with f(lo) < 0 < f(hi).
template <class F>
double brent(F f, double lo, double hi, double f_lo, double f_hi, double tol) {
  double a = lo, b = hi, c = hi;
  double fa = f_lo, fb = f_hi, fc = f_hi;
  double d = b - a, e = d;
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    if ((fb > 0 && fc > 0) || (fb < 0 && fc < 0)) {
      c = a;
      fc = fa;
      e = d = b - a;
    }
    if (std::fabs(fc) < std::fabs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::fabs(b) + 0.5 * tol;
    const double xm = 0.5 * (c - b);
    if (std::fabs(xm) <= tol1 || fb == 0.0) return b;
    if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0) q = -q;
      p = std::fabs(p);
      const double min1 = 3.0 * xm * q - std::fabs(tol1 * q);
      const double min2 = std::fabs(e * q);
      if (2.0 * p < std::min(min1, min2)) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::fabs(d) > tol1 ? d : std::copysign(tol1, xm);
    fb = f(b);
  }
  throw SolverError(SolverError::Kind::MaxIterations,
                    "band solver: tolerance not reached in maximum iterations");
}

// Root of residual(gap) = 0 over gap > 0, where residual(0) < 0 and the
// residual is expected to increase through a single sign change.
template <class F>
double solve_gap(F residual, double guess, double tol) {
  double lo = 0.0;
  double f_lo = residual(0.0);
  if (f_lo >= 0.0) return 0.0;

  double hi = std::max(guess, 4.0 * tol);
  double f_hi = residual(hi);
  if (f_hi < 0.0) {
    while (f_hi < 0.0) {
      lo = hi;
      f_lo = f_hi;
      hi *= 2.0;
      if (hi > kMaxGap) {
        throw SolverError(SolverError::Kind::NoBracket,
                          "band solver: no sign change within a gap of 1e6");
      }
      f_hi = residual(hi);
    }
  } else {
    double mid = 0.5 * hi;
    while (mid > tol) {
      const double f_mid = residual(mid);
      if (f_mid < 0.0) {
        lo = mid;
        f_lo = f_mid;
        break;
      }
      hi = mid;
      f_hi = f_mid;
      mid *= 0.5;
    }
  }

  // Uniqueness is checked, not assumed: the sign pattern across the bracket
  // must switch exactly once.
  int changes = 0;
  double prev = f_lo;
  for (int i = 1; i <= kScanPoints; ++i) {
    const double x = lo + (hi - lo) * i / (kScanPoints + 1);
    const double fx = residual(x);
    if ((fx >= 0.0) != (prev >= 0.0)) ++changes;
    prev = fx;
  }
  if ((f_hi >= 0.0) != (prev >= 0.0)) ++changes;
  if (changes != 1) {
    throw SolverError(SolverError::Kind::MultipleRoots,
                      "band solver: more than one sign change in the bracket");
  }
  return brent(residual, lo, hi, f_lo, f_hi, tol);
}

double initial_gap(double q, double target) {
  // Cube-root law near zero, square-root growth at large |q|, and G ~ gap
  // for large costs. Any of them only seeds the bracket expansion.
  double guess = std::cbrt(6.0 * target);
  if (std::fabs(q) > 1.0) guess = std::min(guess, std::sqrt(target * std::fabs(q)));
  return guess;
}

void check_inputs(const OuParams& params, const CostParams& costs, double tol) {
  params.validate();
  costs.validate();
  if (!(costs.gamma > 0.0)) {
    throw std::invalid_argument("zero-cost degenerate band: Gamma must be positive");
  }
  if (!(tol > 0.0)) throw std::invalid_argument("band solver: tolerance must be positive");
}

std::string annotate(const std::string& what, double p) {
  std::ostringstream os;
  os.precision(17);
  os << what << " (at p = " << p << ")";
  return os.str();
}

}  // namespace

double g_function(double q1, double q2) {
  if (!(q2 <= q1)) throw std::invalid_argument("g_function: requires q2 <= q1");
  if (q2 == q1) return 0.0;
  const double log_s = int_exp_minus_scaled(q2, q1).log_magnitude();
  auto one_minus_phi = [q1, q2, log_s](double x) {
    if (x <= q2 || x >= q1) return 0.0;
    const double log_l = int_exp_minus_scaled(q2, x).log_magnitude() - log_s;
    const double log_h = int_exp_minus_scaled(x, q1).log_magnitude() - log_s;
    return -weighted_expm1(log_l, (x - q1) * (x + q1)) -
           weighted_expm1(log_h, (x - q2) * (x + q2));
  };
  const double units = (q1 - q2) * (1.0 + std::max(std::fabs(q1), std::fabs(q2)));
  if (units > kShortInterval) {
    double error = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        one_minus_phi, q2, q1, kQuadratureDepth, 1e-13, &error);
  }
  using Rule = boost::math::quadrature::gauss<double, 20>;
  const int panels = std::max(1, static_cast<int>(std::ceil(kPanelDensity * units)));
  const double half = 0.5 * (q1 - q2) / panels;
  double sum = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double centre = q2 + (2 * k + 1) * half;
    sum += half * Rule::integrate([&](double t) { return one_minus_phi(centre + half * t); }, -1.0, 1.0);
  }
  return sum;
}

double g_function_direct(double q1, double q2) {
  if (!(q2 <= q1)) throw std::invalid_argument("g_function_direct: requires q2 <= q1");
  if (q2 == q1) return 0.0;
  const LogScaled e1 = LogScaled::exp(-q1 * q1);
  const LogScaled numerator = e1 - LogScaled::exp(-q2 * q2);
  const LogScaled i = int_exp_plus(q1, q2);
  const LogScaled j = int_exp_minus_scaled(q1, q2);
  const LogScaled k = double_integral_k(q2, q1);
  return (q1 - q2) + (e1 * i - numerator / j * k).to_double();
}

double f_function(double q1, double q2) {
  if (!(q2 < q1)) throw std::invalid_argument("f_function: requires q2 < q1");
  if (q1 + q2 == 0.0) return 0.0;
  // e^{-q2^2} - e^{-q1^2} = e^{-q2^2} (1 - e^{-(q1 - q2)(q1 + q2)})
  const double z = -(q1 - q2) * (q1 + q2);
  const double log_num = -q2 * q2 + log_abs_expm1(z);
  const int sign = z < 0.0 ? 1 : -1;
  const double log_den = std::log(2.0) + int_exp_minus_scaled(q2, q1).log_magnitude();
  const double f = sign * std::exp(log_num - log_den);
  return std::clamp(f, q2, q1);
}

namespace dimensionless {

double solve_q2(double q1, double target, double tol, std::optional<double> hint) {
  if (!(target >= 0.0)) throw std::invalid_argument("solve_q2: target must be >= 0");
  auto residual = [q1, target](double gap) { return g_function(q1, q1 - gap) - target; };
  const double guess = hint.value_or(initial_gap(q1, target));
  return q1 - solve_gap(residual, guess, tol);
}

double solve_q1(double q2, double target, double tol, std::optional<double> hint) {
  if (!(target >= 0.0)) throw std::invalid_argument("solve_q1: target must be >= 0");
  auto residual = [q2, target](double gap) { return g_function(q2 + gap, q2) - target; };
  const double guess = hint.value_or(initial_gap(q2, target));
  return q2 + solve_gap(residual, guess, tol);
}

}  // namespace dimensionless

EdgePair solve_p2(double p1, const OuParams& params, const CostParams& costs, double tol,
                  std::optional<double> hint) {
  check_inputs(params, costs, tol);
  const double scale = std::sqrt(params.a());
  const double target = 2.0 * cost_ratio(params, costs);
  const double q1 = to_dimensionless(p1, params);
  std::optional<double> q_hint;
  if (hint) q_hint = *hint * scale;
  const double q2 = dimensionless::solve_q2(q1, target, tol, q_hint);
  EdgePair pair;
  pair.p1 = p1;
  pair.p2 = from_dimensionless(q2, params);
  pair.edge = q2 < q1 ? std::min(from_dimensionless(f_function(q1, q2), params), p1) : p1;
  pair.discrete_regime = params.epsilon * std::fabs(p1) > costs.gamma;
  return pair;
}

EdgePair solve_p1(double p2, const OuParams& params, const CostParams& costs, double tol,
                  std::optional<double> hint) {
  check_inputs(params, costs, tol);
  const double scale = std::sqrt(params.a());
  const double target = 2.0 * cost_ratio(params, costs);
  const double q2 = to_dimensionless(p2, params);
  std::optional<double> q_hint;
  if (hint) q_hint = *hint * scale;
  const double q1 = dimensionless::solve_q1(q2, target, tol, q_hint);
  EdgePair pair;
  pair.p1 = from_dimensionless(q1, params);
  pair.p2 = p2;
  pair.edge = q2 < q1 ? std::max(from_dimensionless(f_function(q1, q2), params), p2) : p2;
  pair.discrete_regime = params.epsilon * std::fabs(p2) > costs.gamma;
  return pair;
}

BandCurve band_curve(std::span<const double> p_grid, const OuParams& params,
                     const CostParams& costs, double tol) {
  if (p_grid.empty()) throw std::invalid_argument("band_curve: empty predictor grid");
  for (std::size_t i = 1; i < p_grid.size(); ++i) {
    if (!(p_grid[i] > p_grid[i - 1])) {
      throw std::invalid_argument("band_curve: predictor grid must be strictly increasing");
    }
  }
  check_inputs(params, costs, tol);

  BandCurve curve;
  curve.params = params;
  curve.costs = costs;
  curve.points.reserve(p_grid.size());
  std::optional<double> lower_gap;
  std::optional<double> upper_gap;
  for (double p : p_grid) {
    BandPoint point{p, 0.0, 0.0};
    try {
      const EdgePair low = solve_p2(p, params, costs, tol, lower_gap);
      point.lower = low.edge;
      lower_gap = low.p1 - low.p2;
      if (p == 0.0) {
        point.upper = -point.lower;
        upper_gap = lower_gap;
      } else {
        const EdgePair up = solve_p1(p, params, costs, tol, upper_gap);
        point.upper = up.edge;
        upper_gap = up.p1 - up.p2;
      }
      if (low.discrete_regime) ++curve.discrete_regime_points;
    } catch (const SolverError& e) {
      throw SolverError(e.kind(), annotate(e.what(), p));
    }
    if (!(point.lower <= p && p <= point.upper)) {
      throw std::logic_error(annotate("band_curve: predictor outside its band", p));
    }
    curve.points.push_back(point);
  }
  return curve;
}

double asymptotic_small_p(const CostParams& costs, const OuParams& params) {
  return std::cbrt(1.5 * costs.gamma * params.beta * params.beta);
}

UpperLower asymptotic_large_p(double p, const CostParams& costs, const OuParams& params) {
  const double gap = std::sqrt(2.0 * costs.gamma * params.epsilon * std::fabs(p));
  if (p >= 0.0) return {p, p - gap};
  return {p + gap, p};
}

double asymptotic_discrete_band(const CostParams& costs) { return 2.0 * costs.gamma; }

double asymptotic_large_gamma_width(const OuParams& params) {
  return 2.0 * params.beta / std::sqrt(std::numbers::pi * params.epsilon);
}

ExitFunctionals exit_functionals(double p, const EdgePair& pair, const OuParams& params) {
  params.validate();
  if (!(pair.p2 < pair.p1)) throw std::invalid_argument("exit_functionals: requires p2 < p1");
  if (p < pair.p2 || p > pair.p1) {
    throw std::invalid_argument("exit_functionals: p outside [p2, p1]");
  }
  const double q = to_dimensionless(p, params);
  const double q1 = to_dimensionless(pair.p1, params);
  const double q2 = to_dimensionless(pair.p2, params);
  const double eps = params.epsilon;

  // Green's function form of the occupation time, free of cancellation:
  //   R = 2/eps [P_low K(q2, q) + P_high K(-q1, -q)].
  const LogScaled i_total = int_exp_plus(q2, q1);
  const LogScaled exit_low = int_exp_plus(q, q1) / i_total;
  const LogScaled exit_high = int_exp_plus(q2, q) / i_total;
  const LogScaled below = double_integral_k(q2, q);
  const LogScaled above = double_integral_k(-q1, -q);

  ExitFunctionals out;
  out.exit_low = exit_low.to_double();
  out.gain = (p - pair.p1 - (pair.p2 - pair.p1) * out.exit_low) / eps;
  out.occupation = 2.0 / eps * (exit_low * below + exit_high * above).to_double();
  return out;
}

ExitFunctionals exit_functionals_derivative(double p, const EdgePair& pair,
                                            const OuParams& params) {
  params.validate();
  if (!(pair.p2 < pair.p1)) {
    throw std::invalid_argument("exit_functionals_derivative: requires p2 < p1");
  }
  const double scale = std::sqrt(params.a());
  const double q = to_dimensionless(p, params);
  const double q1 = to_dimensionless(pair.p1, params);
  const double q2 = to_dimensionless(pair.p2, params);
  const double eps = params.epsilon;

  const LogScaled i_total = int_exp_plus(q1, q2);
  const LogScaled k_total = double_integral_k(q2, q1);
  const LogScaled density = LogScaled::exp(q * q);
  const LogScaled d_exit = density / i_total;
  const LogScaled inner = int_exp_minus_scaled(q1, q);

  ExitFunctionals out;
  out.exit_low = scale * d_exit.to_double();
  out.gain = (1.0 - (pair.p2 - pair.p1) * out.exit_low) / eps;
  out.occupation = 2.0 * scale / eps * (k_total * d_exit - density * inner).to_double();
  return out;
}

KolmogorovResiduals kolmogorov_residuals(double p, const EdgePair& pair, const OuParams& params) {
  if (!(pair.p2 < p && p < pair.p1)) {
    throw std::invalid_argument("kolmogorov_residuals: p must lie strictly inside (p2, p1)");
  }
  const double width = pair.p1 - pair.p2;
  const double h = std::min({1e-4 * width, (p - pair.p2) / 2.5, (pair.p1 - p) / 2.5});

  std::array<ExitFunctionals, 5> f;
  for (int k = -2; k <= 2; ++k) f[k + 2] = exit_functionals(p + k * h, pair, params);

  auto first = [&](auto member) {
    return (-(f[4].*member) + 8.0 * (f[3].*member) - 8.0 * (f[1].*member) + (f[0].*member)) /
           (12.0 * h);
  };
  auto second = [&](auto member) {
    return (-(f[4].*member) + 16.0 * (f[3].*member) - 30.0 * (f[2].*member) +
            16.0 * (f[1].*member) - (f[0].*member)) /
           (12.0 * h * h);
  };
  const double diffusion = 0.5 * params.beta * params.beta;
  const double drift = params.epsilon * p;
  auto residual = [&](auto member, double rhs) {
    const double lhs = diffusion * second(member) - drift * first(member);
    return (lhs - rhs) / std::max(1.0, std::fabs(rhs));
  };

  KolmogorovResiduals r;
  r.gain = residual(&ExitFunctionals::gain, -p);
  r.occupation = residual(&ExitFunctionals::occupation, -1.0);
  r.exit_low = residual(&ExitFunctionals::exit_low, 0.0);
  return r;
}

}  // namespace tradeband
