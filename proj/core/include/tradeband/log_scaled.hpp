#pragma once

#include <compare>
#include <string>

namespace tradeband {

/// A real number stored as sign * exp(log_magnitude).
///
/// Used for the exponential-quadratic integrals of the band equations, whose
/// pieces routinely reach e^{+-10^3} and beyond. Products and quotients are
/// exact in log space; sums go through log-sum-exp with the larger magnitude
/// factored out, so nothing overflows for |log_magnitude| up to ~1e6.
class LogScaled {
 public:
  /// Zero.
  constexpr LogScaled() = default;

  /// Exact conversion from a finite double.
  explicit LogScaled(double value);

  static LogScaled from_log(int sign, double log_magnitude);
  /// e^x, which may be far outside double range.
  static LogScaled exp(double x) { return from_log(1, x); }

  int sign() const { return sign_; }
  /// Natural log of |value|. Meaningless when sign() == 0.
  double log_magnitude() const { return log_magnitude_; }
  bool is_zero() const { return sign_ == 0; }

  /// Back to a plain double. Overflows to +-inf / underflows to 0 outside
  /// double range; exact to rounding when |log_magnitude| < 700.
  double to_double() const;

  LogScaled abs() const { return from_log(sign_ == 0 ? 0 : 1, log_magnitude_); }

  LogScaled operator-() const;
  LogScaled& operator+=(const LogScaled& rhs);
  LogScaled& operator-=(const LogScaled& rhs);
  LogScaled& operator*=(const LogScaled& rhs);
  LogScaled& operator/=(const LogScaled& rhs);

  friend LogScaled operator+(LogScaled lhs, const LogScaled& rhs) { return lhs += rhs; }
  friend LogScaled operator-(LogScaled lhs, const LogScaled& rhs) { return lhs -= rhs; }
  friend LogScaled operator*(LogScaled lhs, const LogScaled& rhs) { return lhs *= rhs; }
  friend LogScaled operator/(LogScaled lhs, const LogScaled& rhs) { return lhs /= rhs; }

  friend bool operator==(const LogScaled& a, const LogScaled& b);
  friend std::partial_ordering operator<=>(const LogScaled& a, const LogScaled& b);

  std::string to_string() const;

 private:
  int sign_ = 0;
  double log_magnitude_ = 0.0;
};

/// Result of a - b with a flag raised when the operands agreed to better than
/// kCancellationThreshold relative precision and the result was forced to zero.
struct Difference {
  LogScaled value;
  bool cancelled = false;
};

inline constexpr double kCancellationThreshold = 1e-13;

Difference subtract(const LogScaled& a, const LogScaled& b);

/// Sum of a and b computed as log(e^x + e^y) without overflow.
double log_add(double x, double y);

}  // namespace tradeband
