#pragma once

#include <array>
#include <span>

#include "mono3d/errors.hpp"

namespace mono3d {

/// A 3D size (h, w, l), all components strictly positive.
struct SizeTriple {
  double h = 0.0, w = 0.0, l = 0.0;

  double operator[](int i) const { return i == 0 ? h : (i == 1 ? w : l); }
  double& operator[](int i) { return i == 0 ? h : (i == 1 ? w : l); }
  double volume() const { return h * w * l; }

  bool operator==(const SizeTriple&) const = default;
};

/// Depth head output: point estimate and predicted standard deviation.
struct DepthPrediction {
  double d = 0.0;
  double sigma = 1.0;
};

enum class WeightScheme { Hard, Soft };

/// Distance-based training-weight parameters. Hard uses s_threshold; Soft
/// uses the reverse-sigmoid center c and temperature T.
struct SampleWeightParams {
  WeightScheme scheme = WeightScheme::Hard;
  double s_threshold = 60.0;  // meters
  double c = 60.0;            // meters
  double T = 1.0;             // dimensionless, > 0
};

inline constexpr int kHeadingBins = 12;

/// Heading angle as (bin, residual): bins partition [0, 2pi) into 12 equal
/// non-overlapping sectors, residual measured from the bin center.
struct HeadingEncoding {
  int bin_index = 0;       // [0, 12)
  double residual = 0.0;   // [-pi/12, pi/12)
};

struct ValueGrad3 {
  double value = 0.0;
  std::array<double, 3> grad{};
};

struct CompensatedSizeLoss {
  double value = 0.0;
  double weight = 1.0;
  std::array<double, 3> grad{};
};

/// Partials of iou_3d_axis_aligned w.r.t. the predicted sides. A component's
/// one_sided flag is set when that side equals its target exactly (the min
/// kink); the from-below branch is used there.
struct IouPartials {
  std::array<double, 3> d{};
  std::array<bool, 3> one_sided{};
};

struct DepthLossResult {
  double value = 0.0;
  double d_depth = 0.0;
  double d_sigma = 0.0;  // w.r.t. sigma (Laplace) or sigma^2 (Gaussian)
};

/// Plain L1 size loss sum_i |s_i - s*_i|.
double size_loss_l1(const SizeTriple& s, const SizeTriple& s_star);

/// IoU-oriented size loss ||(s - s*)/s||_1. The returned gradient treats the
/// 1/s denominator as a constant (stop-gradient), giving the per-side
/// weighting sign(s_i - s*_i)/s_i; use size_loss_iou_naive_gradient for the
/// derivative that also differentiates the denominator.
/// Throws DegenerateSize when any s_i <= 1e-6.
ValueGrad3 size_loss_iou(const SizeTriple& s, const SizeTriple& s_star);

std::array<double, 3> size_loss_iou_naive_gradient(const SizeTriple& s, const SizeTriple& s_star);

/// IoU-oriented loss scaled back to L1 magnitude: weight w = |L1/Liou|
/// (treated as a constant), value = w * Liou == L1 in magnitude. At s == s*
/// both losses vanish and the weight takes its limit value 1.
CompensatedSizeLoss size_loss_compensated(const SizeTriple& s, const SizeTriple& s_star);

/// Analytic partials of iou_3d_axis_aligned covering all 8 sign patterns of
/// s_i vs s*_i.
IouPartials iou_partial_ratio(const SizeTriple& s, const SizeTriple& s_star);

/// Laplace uncertainty depth loss sqrt(2)/sigma * |d - d*| + log sigma,
/// with analytic gradients w.r.t. d and sigma. Throws InvalidSigma.
DepthLossResult depth_loss_laplace(const DepthPrediction& p, double d_star);

/// Gaussian uncertainty depth loss (d - d*)^2 / (2 sigma^2) + log(sigma^2)/2.
/// d_sigma is the gradient w.r.t. the variance sigma^2. Throws InvalidSigma.
DepthLossResult depth_loss_gaussian(const DepthPrediction& p, double d_star);

/// Object-level training weight in [0, 1]; Hard is a step at s_threshold,
/// Soft the reverse sigmoid 1/(1 + exp((d - c)/T)).
double sample_weight(double depth, const SampleWeightParams& params);

HeadingEncoding heading_encode(double theta);
double heading_decode(const HeadingEncoding& enc);

/// Multi-bin heading loss: softmax cross-entropy over the 12 bins against
/// the ground-truth bin plus |residual_pred - residual*| on that bin.
/// Throws InvalidArgument unless exactly 12 logits are given.
double heading_loss(std::span<const double> logits, double residual_pred, double theta_star);

/// Normalizes an angle to [-pi, pi].
double normalize_angle(double theta);

/// KITTI viewing-angle conversion: rotation_y = alpha + atan2(x, z).
double alpha_to_rotation_y(double alpha, double x, double z);
double rotation_y_to_alpha(double rotation_y, double x, double z);

}  // namespace mono3d
