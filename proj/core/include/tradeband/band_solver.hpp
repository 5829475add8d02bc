#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tradeband/ou_model.hpp"

namespace tradeband {

/// Default root-finding tolerance on the coupled predictor value, in
/// dimensionless units (q = p sqrt(a)).
inline constexpr double kDefaultTolerance = 1e-10;

class SolverError : public std::runtime_error {
 public:
  enum class Kind { NoBracket, MaxIterations, MultipleRoots };

  SolverError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Two predictor values sharing one band edge: the position `edge` is the
/// lower edge of the band at p1 and the upper edge of the band at p2.
struct EdgePair {
  double p1 = 0.0;
  double p2 = 0.0;
  double edge = 0.0;
  /// Set when epsilon |p| > Gamma at the requested predictor: the continuous
  /// solution is still returned but the band is expected to saturate at 2 Gamma.
  bool discrete_regime = false;
};

struct BandPoint {
  double p = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct BandCurve {
  std::vector<BandPoint> points;
  OuParams params;
  CostParams costs;
  /// Number of grid points flagged as outside the continuous regime.
  int discrete_regime_points = 0;
};

// ---------------------------------------------------------------------------
// Dimensionless band equations. With q = p sqrt(a) the lower edge at q1 is
// F(q1, q2) / sqrt(a), where q2 < q1 solves G(q1, q2) = 2 Gamma eps^{3/2}/beta.

/// G(q1, q2). Requires q2 <= q1; G(q, q) = 0.
///
/// Evaluated as G = int_{q2}^{q1} (1 - phi(x)) dx with
///   phi(x) = [e^{x^2 - q1^2} L(x) + e^{x^2 - q2^2} H(x)] / (L(x) + H(x)),
///   L(x) = int_{q2}^{x} e^{-y^2} dy,  H(x) = int_{x}^{q1} e^{-y^2} dy,
/// which is algebraically identical to q1 - q2 + e^{-q1^2} I - (N / J) K but
/// never forms the e^{+q^2}-sized pieces whose leading terms cancel once
/// |q2| grows past a few units. phi stays O(1) on the whole interval.
double g_function(double q1, double q2);

/// The same G assembled term by term from int_exp_plus, int_exp_minus and
/// double_integral_k. Only usable while the pieces stay moderate (|q| < ~5);
/// kept as an independent cross-check of g_function.
double g_function_direct(double q1, double q2);

/// F(q1, q2) = (e^{-q1^2} - e^{-q2^2}) / (2 int_{q1}^{q2} e^{-x^2} dx).
/// Requires q2 < q1. This is the e^{-x^2}-weighted mean of x over [q2, q1],
/// so the result always lies inside the interval. Returns exactly 0 when
/// q2 = -q1.
double f_function(double q1, double q2);

namespace dimensionless {

/// q2 < q1 with G(q1, q2) = target. `hint` is a guess for q1 - q2.
double solve_q2(double q1, double target, double tol = kDefaultTolerance,
                std::optional<double> hint = std::nullopt);

/// q1 > q2 with G(q1, q2) = target.
double solve_q1(double q2, double target, double tol = kDefaultTolerance,
                std::optional<double> hint = std::nullopt);

}  // namespace dimensionless

// ---------------------------------------------------------------------------
// Predictor-unit interface.

/// Lower edge at p1: finds the coupled p2 < p1 and returns edge = l(p1).
/// Requires Gamma > 0.
EdgePair solve_p2(double p1, const OuParams& params, const CostParams& costs,
                  double tol = kDefaultTolerance, std::optional<double> hint = std::nullopt);

/// Upper edge at p2: finds the coupled p1 > p2 and returns edge = u(p2).
EdgePair solve_p1(double p2, const OuParams& params, const CostParams& costs,
                  double tol = kDefaultTolerance, std::optional<double> hint = std::nullopt);

/// Band edges on a strictly increasing predictor grid, warm-starting each
/// root search from the neighbouring node. p = 0 uses l(0) = -u(0).
BandCurve band_curve(std::span<const double> p_grid, const OuParams& params,
                     const CostParams& costs, double tol = kDefaultTolerance);

// ---------------------------------------------------------------------------
// Asymptotic laws.

/// (3 Gamma beta^2 / 2)^{1/3}: u(0) = -l(0) for small costs.
double asymptotic_small_p(const CostParams& costs, const OuParams& params);

struct UpperLower {
  double upper = 0.0;
  double lower = 0.0;
};

/// (p, p - sqrt(2 Gamma epsilon p)) for p >= 0: fully asymmetric band growing
/// as sqrt(p). Valid while epsilon p << Gamma; negative p by odd symmetry.
UpperLower asymptotic_large_p(double p, const CostParams& costs, const OuParams& params);

/// 2 Gamma: saturated band width once epsilon p exceeds Gamma.
double asymptotic_discrete_band(const CostParams& costs);

/// 2 / sqrt(pi a) = 2 beta / sqrt(pi epsilon): width at p = 0 as Gamma -> inf.
double asymptotic_large_gamma_width(const OuParams& params);

// ---------------------------------------------------------------------------
// Kolmogorov backward equations on (p2, p1).

/// Closed forms of the expected gain G(p), occupation time R(p) and
/// probability P(p) of leaving through p2, for a predictor started at p and
/// stopped on exiting (p2, p1).
struct ExitFunctionals {
  double gain = 0.0;
  double occupation = 0.0;
  double exit_low = 0.0;
};

ExitFunctionals exit_functionals(double p, const EdgePair& pair, const OuParams& params);

/// Analytic first derivatives of the same functionals.
ExitFunctionals exit_functionals_derivative(double p, const EdgePair& pair,
                                            const OuParams& params);

struct KolmogorovResiduals {
  double gain = 0.0;
  double occupation = 0.0;
  double exit_low = 0.0;
};

/// Residuals of beta^2/2 f'' - epsilon p f' - rhs for the three closed forms
/// (rhs = -p, -1, 0), with fourth-order central differences of step
/// 1e-4 (p1 - p2) and each residual divided by max(1, |rhs|).
/// Throws std::invalid_argument unless p2 < p < p1.
KolmogorovResiduals kolmogorov_residuals(double p, const EdgePair& pair, const OuParams& params);

}  // namespace tradeband
