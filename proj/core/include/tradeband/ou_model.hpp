#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace tradeband {

/// Discrete Ornstein-Uhlenbeck predictor p_{t+1} = (1 - epsilon) p_t + beta xi_t.
struct OuParams {
  double epsilon = 0.01;  // mean-reversion rate per step, in (0, 1)
  double beta = 0.01;     // noise scale per step, predictor units

  /// a = epsilon / beta^2, the inverse squared natural predictor scale.
  double a() const { return epsilon / (beta * beta); }

  /// Throws std::invalid_argument unless 0 < epsilon < 1 and beta > 0.
  void validate() const;
};

/// Linear trading cost Gamma per unit traded. The risk coefficient is fixed
/// at lambda = 1/2 throughout and is not a parameter.
struct CostParams {
  double gamma = 0.0;

  void validate() const;
};

struct PredictorPath {
  std::vector<double> values;  // p_0 ... p_T
  std::uint64_t seed = 0;
};

/// One step of the recurrence.
double step(double p, const OuParams& params, double xi);

/// Standard normal variates that are reproducible across platforms.
///
/// std::normal_distribution is implementation-defined, so the draws are made
/// explicitly: std::mt19937_64 seeded through splitmix64(seed), 53-bit
/// uniforms, and the Box-Muller transform (both variates of a pair are used).
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed);
  double next();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// splitmix64 finalizer; also used to derive per-path seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed of the index-th path of a run seeded with `seed`.
std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index);

/// `length` values starting at p0, driven by NormalStream(seed).
PredictorPath sample_path(const OuParams& params, double p0, std::size_t length,
                          std::uint64_t seed);

/// Exact stationary standard deviation of the discrete recurrence (any
/// 0 < epsilon < 2, including the white-noise case epsilon = 1),
/// beta / sqrt(epsilon (2 - epsilon)).
double stationary_std(const OuParams& params);

/// q = p sqrt(epsilon) / beta.
double to_dimensionless(double p, const OuParams& params);
double from_dimensionless(double q, const OuParams& params);

/// Gamma epsilon^{3/2} / beta: the single cost parameter of the rescaled band.
double cost_ratio(const OuParams& params, const CostParams& costs);

/// Inverse of cost_ratio for fixed OU parameters.
CostParams costs_for_ratio(double ratio, const OuParams& params);

}  // namespace tradeband
