#include "tradeband/special_functions.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace tradeband {
namespace {

constexpr double kSeriesLimit = 6.5;
constexpr double kErfcxAsymptotic = 10.0;
constexpr double kLogHalfSqrtPi = -0.12078223763524522;  // log(sqrt(pi)/2)

// e^{s x^2} with the rounding error of x*x recovered through fma.
double exp_square(double x, double s) {
  const double hi = x * x;
  const double lo = std::fma(x, x, -hi);
  return std::exp(s * hi) * std::exp(s * lo);
}

// Fixed-order Gauss-Legendre on intervals where the integrand varies by at
// most a small factor; used when the antiderivative difference would cancel.
template <class F>
double gauss_legendre(F f, double a, double b) {
  return boost::math::quadrature::gauss<double, 30>::integrate(f, a, b);
}

// Sum of the positive series int_0^x e^{t^2} dt = sum x^{2n+1} / (n! (2n+1)).
double exp_square_integral_series(double x) {
  const double x2 = x * x;
  double c = x;  // x^{2n+1} / n!
  double sum = x;
  for (int n = 1; n < 1000; ++n) {
    c *= x2 / n;
    const double term = c / (2 * n + 1);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

double dawson_asymptotic(double x) {
  const double y = 0.5 / (x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int n = 1; n < 200; ++n) {
    const double next = term * (2 * n - 1) * y;
    if (next >= term) break;
    term = next;
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum / (2.0 * x);
}

// log D(x) for x > 0.
double log_dawson(double x) { return std::log(dawson(x)); }

// int_a^b e^{x^2} dx for 0 <= a < b.
LogScaled exp_plus_same_sign(double a, double b) {
  const double log_hi = b * b + log_dawson(b);
  if (a == 0.0) return LogScaled::from_log(1, log_hi);
  const double log_lo = a * a + log_dawson(a);
  const double ratio = std::exp(log_lo - log_hi);
  if (ratio > 0.5) {
    const double scaled = gauss_legendre(
        [a, b](double x) { return std::exp((x - b) * (x + b)); }, a, b);
    (void)a;
    return LogScaled::from_log(1, b * b + std::log(scaled));
  }
  return LogScaled::from_log(1, log_hi + std::log1p(-ratio));
}

// int_a^b e^{-x^2} dx for 0 <= a < b <= inf.
LogScaled exp_minus_tail(double a, double b) {
  const double ea = erfcx(a);
  double ratio = 0.0;
  if (std::isfinite(b)) {
    ratio = std::exp(-(b - a) * (b + a)) * erfcx(b) / ea;
  }
  if (ratio > 0.5) {
    const double scaled = gauss_legendre(
        [a](double x) { return std::exp(-(x - a) * (x + a)); }, a, b);
    return LogScaled::from_log(1, -a * a + std::log(scaled));
  }
  return LogScaled::from_log(1, kLogHalfSqrtPi - a * a + std::log(ea) + std::log1p(-ratio));
}

}  // namespace

double dawson(double x) {
  const double ax = std::fabs(x);
  double d;
  if (ax < kSeriesLimit) {
    d = exp_square_integral_series(ax) * exp_square(ax, -1.0);
  } else {
    d = dawson_asymptotic(ax);
  }
  return x < 0 ? -d : d;
}

double erfcx(double x) {
  if (x < 0) {
    return 2.0 * exp_square(x, 1.0) - erfcx(-x);
  }
  if (x < kErfcxAsymptotic) {
    return exp_square(x, 1.0) * std::erfc(x);
  }
  // erfcx(x) ~ 1/(x sqrt(pi)) * sum (-1)^n (2n-1)!! / (2x^2)^n
  const double y = 0.5 / (x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int n = 1; n < 100; ++n) {
    term *= -(2 * n - 1) * y;
    sum += term;
    if (std::fabs(term) < 1e-17) break;
  }
  return sum / (x * std::sqrt(std::numbers::pi));
}

LogScaled int_exp_plus(double q_lo, double q_hi) {
  if (!std::isfinite(q_lo) || !std::isfinite(q_hi)) {
    throw std::domain_error("int_exp_plus: bounds must be finite");
  }
  if (q_lo == q_hi) return LogScaled{};
  if (q_lo > q_hi) return -int_exp_plus(q_hi, q_lo);
  if (q_lo >= 0.0) return exp_plus_same_sign(q_lo, q_hi);
  if (q_hi <= 0.0) return exp_plus_same_sign(-q_hi, -q_lo);
  // Straddles zero: both halves positive, no cancellation.
  const LogScaled right = LogScaled::from_log(1, q_hi * q_hi + log_dawson(q_hi));
  const LogScaled left = LogScaled::from_log(1, q_lo * q_lo + log_dawson(-q_lo));
  return right + left;
}

LogScaled int_exp_minus_scaled(double q_lo, double q_hi) {
  if (std::isnan(q_lo) || std::isnan(q_hi)) {
    throw std::domain_error("int_exp_minus: NaN bound");
  }
  if (q_lo == q_hi) return LogScaled{};
  if (q_lo > q_hi) return -int_exp_minus_scaled(q_hi, q_lo);
  if (q_lo >= 0.0) return exp_minus_tail(q_lo, q_hi);
  if (q_hi <= 0.0) return exp_minus_tail(-q_hi, -q_lo);
  const double half_sqrt_pi = 0.5 * std::sqrt(std::numbers::pi);
  return LogScaled(half_sqrt_pi * (std::erf(q_hi) + std::erf(-q_lo)));
}

double int_exp_minus(double q_lo, double q_hi) {
  return int_exp_minus_scaled(q_lo, q_hi).to_double();
}

LogScaled double_integral_k(double q2, double q1) {
  if (!(q2 <= q1)) {
    throw std::invalid_argument("double_integral_k: requires q2 <= q1");
  }
  if (q2 == q1) return LogScaled{};

  // K = int_{q2}^{q1} e^{-y^2} int_{q2}^{y} e^{x^2} dx dy by composite
  // 20-point Gauss-Legendre, four panels per unit length, summed in log form
  // against the largest node.
  using Rule = boost::math::quadrature::gauss<double, 20>;
  const auto& nodes = Rule::abscissa();
  const auto& weights = Rule::weights();
  const int panels = std::max(2, static_cast<int>(std::ceil(4.0 * (q1 - q2))));
  const double half = 0.5 * (q1 - q2) / panels;

  std::vector<double> logs;
  std::vector<double> node_weights;
  logs.reserve(2 * nodes.size() * panels);
  node_weights.reserve(2 * nodes.size() * panels);
  for (int k = 0; k < panels; ++k) {
    const double centre = q2 + (2 * k + 1) * half;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      for (double sign : {-1.0, 1.0}) {
        if (nodes[i] == 0.0 && sign > 0) continue;
        const double y = centre + sign * nodes[i] * half;
        logs.push_back(-y * y + int_exp_plus(q2, y).log_magnitude());
        node_weights.push_back(weights[i] * half);
      }
    }
  }
  const double scale = *std::max_element(logs.begin(), logs.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logs.size(); ++i) sum += node_weights[i] * std::exp(logs[i] - scale);
  return LogScaled::from_log(1, scale + std::log(sum));
}

}  // namespace tradeband
