#include "tradeband/log_scaled.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace tradeband {

LogScaled::LogScaled(double value) {
  if (!std::isfinite(value)) {
    throw std::invalid_argument("LogScaled: non-finite value");
  }
  if (value == 0.0) return;
  sign_ = value > 0.0 ? 1 : -1;
  log_magnitude_ = std::log(std::fabs(value));
}

LogScaled LogScaled::from_log(int sign, double log_magnitude) {
  LogScaled r;
  if (sign == 0 || log_magnitude == -std::numeric_limits<double>::infinity()) {
    return r;
  }
  if (std::isnan(log_magnitude)) {
    throw std::invalid_argument("LogScaled: NaN log magnitude");
  }
  r.sign_ = sign > 0 ? 1 : -1;
  r.log_magnitude_ = log_magnitude;
  return r;
}

double LogScaled::to_double() const {
  if (sign_ == 0) return 0.0;
  return sign_ * std::exp(log_magnitude_);
}

LogScaled LogScaled::operator-() const { return from_log(-sign_, log_magnitude_); }

double log_add(double x, double y) {
  if (x < y) std::swap(x, y);
  if (y == -std::numeric_limits<double>::infinity()) return x;
  return x + std::log1p(std::exp(y - x));
}

Difference subtract(const LogScaled& a, const LogScaled& b) {
  if (b.is_zero()) return {a, false};
  if (a.is_zero()) return {-b, false};
  if (a.sign() != b.sign()) {
    return {LogScaled::from_log(a.sign(), log_add(a.log_magnitude(), b.log_magnitude())), false};
  }
  // Same sign: |a| - |b| carries a's sign when |a| > |b|.
  const double gap = a.log_magnitude() - b.log_magnitude();
  // -expm1(-|gap|) is the relative difference |a - b| / max(|a|, |b|).
  const double rel = -std::expm1(-std::fabs(gap));
  if (rel < kCancellationThreshold) return {LogScaled{}, true};
  const double larger = std::max(a.log_magnitude(), b.log_magnitude());
  const int sign = gap > 0 ? a.sign() : -a.sign();
  return {LogScaled::from_log(sign, larger + std::log(rel)), false};
}

LogScaled& LogScaled::operator+=(const LogScaled& rhs) {
  *this = subtract(*this, -rhs).value;
  return *this;
}

LogScaled& LogScaled::operator-=(const LogScaled& rhs) {
  *this = subtract(*this, rhs).value;
  return *this;
}

LogScaled& LogScaled::operator*=(const LogScaled& rhs) {
  if (sign_ == 0 || rhs.sign_ == 0) {
    *this = LogScaled{};
    return *this;
  }
  sign_ *= rhs.sign_;
  log_magnitude_ += rhs.log_magnitude_;
  return *this;
}

LogScaled& LogScaled::operator/=(const LogScaled& rhs) {
  if (rhs.sign_ == 0) throw std::domain_error("LogScaled: division by zero");
  if (sign_ == 0) return *this;
  sign_ *= rhs.sign_;
  log_magnitude_ -= rhs.log_magnitude_;
  return *this;
}

bool operator==(const LogScaled& a, const LogScaled& b) {
  if (a.sign_ != b.sign_) return false;
  return a.sign_ == 0 || a.log_magnitude_ == b.log_magnitude_;
}

std::partial_ordering operator<=>(const LogScaled& a, const LogScaled& b) {
  if (a.sign_ != b.sign_) return a.sign_ <=> b.sign_;
  if (a.sign_ == 0) return std::partial_ordering::equivalent;
  if (a.sign_ > 0) return a.log_magnitude_ <=> b.log_magnitude_;
  return b.log_magnitude_ <=> a.log_magnitude_;
}

std::string LogScaled::to_string() const {
  std::ostringstream os;
  os.precision(17);
  if (sign_ == 0) {
    os << "0";
  } else {
    os << (sign_ < 0 ? "-" : "+") << "exp(" << log_magnitude_ << ")";
  }
  return os.str();
}

}  // namespace tradeband
