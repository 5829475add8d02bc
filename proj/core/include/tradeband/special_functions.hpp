#pragma once

#include "tradeband/log_scaled.hpp"

namespace tradeband {

// Exponential-quadratic integrals in dimensionless variables (x already
// scaled by sqrt(a)). Everything here is a pure function.

/// Dawson's integral D(x) = e^{-x^2} * int_0^x e^{t^2} dt.
///
/// Positive-term power series of int_0^x e^{t^2} dt for |x| < 6.5 (no
/// alternating cancellation), asymptotic expansion truncated at its smallest
/// term beyond. Relative error below 1e-13 on the whole real line.
double dawson(double x);

/// Scaled complementary error function e^{x^2} erfc(x).
double erfcx(double x);

/// int_{q_lo}^{q_hi} e^{x^2} dx. Antisymmetric under swapping the bounds.
/// Throws std::domain_error for non-finite bounds (the integral diverges).
LogScaled int_exp_plus(double q_lo, double q_hi);

/// int_{q_lo}^{q_hi} e^{-x^2} dx. Infinite bounds are allowed.
double int_exp_minus(double q_lo, double q_hi);

/// Same integral as int_exp_minus, keeping full relative precision deep in
/// the tails where the plain double underflows.
LogScaled int_exp_minus_scaled(double q_lo, double q_hi);

/// K = double integral of e^{x^2 - y^2} over the triangle q2 <= x <= y <= q1.
/// Throws std::invalid_argument when q2 > q1.
LogScaled double_integral_k(double q2, double q1);

}  // namespace tradeband
