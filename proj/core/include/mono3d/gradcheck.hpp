#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace mono3d {

/// Central finite difference (f(x+h) - f(x-h)) / 2h.
double central_difference(const std::function<double(double)>& f, double x, double step = 1e-5);

struct PropertyResult {
  std::string name;
  bool passed = false;
  double worst_error = 0.0;  // relative, except where the check is absolute
  double tolerance = 0.0;
  std::string worst_case;  // inputs of the worst sample, for reproduction
};

struct LossCheckOptions {
  std::uint64_t seed = 1;
  int trials = 1000;
  double weight_center = 60.0;     // c of the soft scheme / s of the hard one
  bool corrupt_gradient = false;   // negative-control hook
};

/// Runs every loss/gradient property: finite-difference agreement for the
/// IoU size loss (stop-gradient and naive forms), the axis-aligned IoU
/// partials over all 8 sign patterns, the Laplace/Gaussian depth losses;
/// the compensation identity; the closed-form partial ratios; the heading
/// round trip; and the soft-to-hard weight limit. Throws InvalidArgument
/// when trials < 1.
std::vector<PropertyResult> run_loss_check(const LossCheckOptions& options);

}  // namespace mono3d
