#include "mono3d/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mono3d {

namespace {

constexpr double kSizeEps = 1e-6;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kBinWidth = kTwoPi / kHeadingBins;

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void require_positive_sizes(const SizeTriple& s, const char* name) {
  for (int i = 0; i < 3; ++i) {
    if (!(s[i] > kSizeEps)) {
      throw DegenerateSize(std::string(name) + " has a component <= 1e-6");
    }
  }
}

}  // namespace

double size_loss_l1(const SizeTriple& s, const SizeTriple& s_star) {
  return std::abs(s.h - s_star.h) + std::abs(s.w - s_star.w) + std::abs(s.l - s_star.l);
}

ValueGrad3 size_loss_iou(const SizeTriple& s, const SizeTriple& s_star) {
  require_positive_sizes(s, "prediction");
  ValueGrad3 out;
  for (int i = 0; i < 3; ++i) {
    const double diff = s[i] - s_star[i];
    out.value += std::abs(diff) / s[i];
    // 1/s_i held constant: the per-side weighting that motivates the loss.
    out.grad[static_cast<std::size_t>(i)] = sign_of(diff) / s[i];
  }
  return out;
}

std::array<double, 3> size_loss_iou_naive_gradient(const SizeTriple& s, const SizeTriple& s_star) {
  require_positive_sizes(s, "prediction");
  std::array<double, 3> grad{};
  for (int i = 0; i < 3; ++i) {
    const double diff = s[i] - s_star[i];
    grad[static_cast<std::size_t>(i)] =
        sign_of(diff) / s[i] - std::abs(diff) / (s[i] * s[i]);
  }
  return grad;
}

CompensatedSizeLoss size_loss_compensated(const SizeTriple& s, const SizeTriple& s_star) {
  const double l1 = size_loss_l1(s, s_star);
  const ValueGrad3 iou = size_loss_iou(s, s_star);
  CompensatedSizeLoss out;
  if (l1 == 0.0 || iou.value == 0.0) {
    out.value = 0.0;
    out.weight = 1.0;  // limit convention at s == s*
    return out;
  }
  out.weight = std::abs(l1 / iou.value);
  out.value = out.weight * iou.value;
  for (int i = 0; i < 3; ++i) {
    out.grad[static_cast<std::size_t>(i)] = out.weight * iou.grad[static_cast<std::size_t>(i)];
  }
  return out;
}

IouPartials iou_partial_ratio(const SizeTriple& s, const SizeTriple& s_star) {
  require_positive_sizes(s, "prediction");
  require_positive_sizes(s_star, "target");

  double inter = 1.0;
  for (int i = 0; i < 3; ++i) inter *= std::min(s[i], s_star[i]);
  const double uni = s.volume() + s_star.volume() - inter;

  IouPartials out;
  for (int i = 0; i < 3; ++i) {
    out.one_sided[static_cast<std::size_t>(i)] = s[i] == s_star[i];
    // min(s_i, s*_i) differentiated from below at the tie.
    const double d_inter = s[i] <= s_star[i] ? inter / s[i] : 0.0;
    const double d_union = s.volume() / s[i] - d_inter;
    out.d[static_cast<std::size_t>(i)] = (d_inter * uni - inter * d_union) / (uni * uni);
  }
  return out;
}

DepthLossResult depth_loss_laplace(const DepthPrediction& p, double d_star) {
  if (!(p.sigma > 0.0)) {
    throw InvalidSigma("Laplace depth loss requires sigma > 0");
  }
  const double e = p.d - d_star;
  const double sqrt2 = std::numbers::sqrt2;
  DepthLossResult out;
  out.value = sqrt2 / p.sigma * std::abs(e) + std::log(p.sigma);
  out.d_depth = sqrt2 / p.sigma * sign_of(e);
  out.d_sigma = -sqrt2 * std::abs(e) / (p.sigma * p.sigma) + 1.0 / p.sigma;
  return out;
}

DepthLossResult depth_loss_gaussian(const DepthPrediction& p, double d_star) {
  if (!(p.sigma > 0.0)) {
    throw InvalidSigma("Gaussian depth loss requires sigma > 0");
  }
  const double var = p.sigma * p.sigma;
  const double e = p.d - d_star;
  DepthLossResult out;
  out.value = e * e / (2.0 * var) + 0.5 * std::log(var);
  out.d_depth = e / var;
  out.d_sigma = -e * e / (2.0 * var * var) + 0.5 / var;  // w.r.t. sigma^2
  return out;
}

double sample_weight(double depth, const SampleWeightParams& params) {
  if (params.scheme == WeightScheme::Hard) {
    return depth <= params.s_threshold ? 1.0 : 0.0;
  }
  if (!(params.T > 0.0)) {
    throw InvalidArgument("soft weighting requires T > 0");
  }
  const double t = (depth - params.c) / params.T;
  if (t >= 0.0) {
    const double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

HeadingEncoding heading_encode(double theta) {
  double tau = theta - kTwoPi * std::floor(theta / kTwoPi);
  if (tau >= kTwoPi) tau = 0.0;
  int bin = static_cast<int>(std::floor(tau / kBinWidth));
  bin = std::clamp(bin, 0, kHeadingBins - 1);
  return {bin, tau - (bin + 0.5) * kBinWidth};
}

double heading_decode(const HeadingEncoding& enc) {
  return (enc.bin_index + 0.5) * kBinWidth + enc.residual;
}

double heading_loss(std::span<const double> logits, double residual_pred, double theta_star) {
  if (logits.size() != kHeadingBins) {
    throw InvalidArgument("heading loss requires exactly 12 logits, got " +
                          std::to_string(logits.size()));
  }
  const HeadingEncoding target = heading_encode(theta_star);

  double max_logit = logits[0];
  for (double v : logits) max_logit = std::max(max_logit, v);
  double sum_exp = 0.0;
  for (double v : logits) sum_exp += std::exp(v - max_logit);
  const double cross_entropy =
      max_logit + std::log(sum_exp) - logits[static_cast<std::size_t>(target.bin_index)];

  return cross_entropy + std::abs(residual_pred - target.residual);
}

double normalize_angle(double theta) { return std::remainder(theta, kTwoPi); }

double alpha_to_rotation_y(double alpha, double x, double z) {
  return normalize_angle(alpha + std::atan2(x, z));
}

double rotation_y_to_alpha(double rotation_y, double x, double z) {
  return normalize_angle(rotation_y - std::atan2(x, z));
}

}  // namespace mono3d
