#include "tradeband/ou_model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tradeband {

void OuParams::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("OuParams: epsilon must lie in (0, 1)");
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("OuParams: beta must be positive");
  }
}

void CostParams::validate() const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("CostParams: gamma must be non-negative");
  }
}

double step(double p, const OuParams& params, double xi) {
  return p * (1.0 - params.epsilon) + params.beta * xi;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ (index * 0xd1b54a32d192ed03ULL));
}

NormalStream::NormalStream(std::uint64_t seed) : engine_(splitmix64(seed)) {}

double NormalStream::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  // u1 in (0, 1], u2 in [0, 1)
  const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * kScale;
  const double u2 = static_cast<double>(engine_() >> 11) * kScale;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

PredictorPath sample_path(const OuParams& params, double p0, std::size_t length,
                          std::uint64_t seed) {
  params.validate();
  if (length < 1) throw std::invalid_argument("sample_path: length must be >= 1");
  PredictorPath path;
  path.seed = seed;
  path.values.resize(length);
  path.values[0] = p0;
  NormalStream normals(seed);
  for (std::size_t t = 1; t < length; ++t) {
    path.values[t] = step(path.values[t - 1], params, normals.next());
  }
  return path;
}

double stationary_std(const OuParams& params) {
  // The closed form holds for any stable recurrence, 0 < epsilon < 2.
  if (!(params.epsilon > 0.0 && params.epsilon < 2.0) || !(params.beta > 0.0)) {
    throw std::invalid_argument("stationary_std: requires 0 < epsilon < 2 and beta > 0");
  }
  return params.beta / std::sqrt(params.epsilon * (2.0 - params.epsilon));
}

double to_dimensionless(double p, const OuParams& params) {
  return p * std::sqrt(params.epsilon) / params.beta;
}

double from_dimensionless(double q, const OuParams& params) {
  return q * params.beta / std::sqrt(params.epsilon);
}

double cost_ratio(const OuParams& params, const CostParams& costs) {
  return costs.gamma * params.epsilon * std::sqrt(params.epsilon) / params.beta;
}

CostParams costs_for_ratio(double ratio, const OuParams& params) {
  return CostParams{ratio * params.beta / (params.epsilon * std::sqrt(params.epsilon))};
}

}  // namespace tradeband
