#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tradeband/ou_model.hpp"

namespace tradeband::cli {

/// Exit codes of `run`.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;  // solver error or failed verification
inline constexpr int kUsage = 2;

/// Entry point of tradeband-cli without the program name. Data goes to
/// `out` (or the files named by --out), human-readable text to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct VerifyCheck {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct VerifyOptions {
  bool full = false;
  /// Multiplies every threshold; values far below 1 are a negative control.
  double tolerance_scale = 1.0;
  double dp_cells = 2.0;
};

/// Asymptotic laws, Kolmogorov residuals, symmetry and duality; with
/// `full`, also the DP oracle at desk scale.
std::vector<VerifyCheck> run_verify(const OuParams& params, const CostParams& costs,
                                    const VerifyOptions& options);

}  // namespace tradeband::cli
