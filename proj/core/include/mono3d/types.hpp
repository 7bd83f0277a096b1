#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "mono3d/errors.hpp"

namespace mono3d {

/// KITTI object categories. `DontCare` marks regions that evaluation must
/// neither reward nor penalize.
enum class Category {
  Car,
  Pedestrian,
  Cyclist,
  Van,
  Truck,
  PersonSitting,
  Tram,
  Misc,
  DontCare,
};

std::string_view to_string(Category c);
std::optional<Category> category_from_string(std::string_view name);

/// Axis-aligned image-plane rectangle, pixels. Origin top-left, y down.
struct Box2D {
  double left = 0.0;
  double top = 0.0;
  double right = 0.0;
  double bottom = 0.0;

  double width() const { return right - left; }
  double height() const { return bottom - top; }
  double area() const { return width() * height(); }
  double center_u() const { return 0.5 * (left + right); }
  double center_v() const { return 0.5 * (top + bottom); }

  bool operator==(const Box2D&) const = default;
};

/// One KITTI annotation or prediction row.
///
/// (x, y, z) is the center of the bottom face of the 3D box in camera
/// coordinates (x right, y down, z forward); the box spans [y - h, y]
/// vertically. alpha and rotation_y are kept normalized to [-pi, pi].
struct ObjectLabel {
  Category category = Category::Car;
  double truncation = 0.0;
  int occlusion = 0;
  double alpha = 0.0;
  Box2D box2d;
  double h = 0.0, w = 0.0, l = 0.0;  // meters
  double x = 0.0, y = 0.0, z = 0.0;  // meters, camera frame
  double rotation_y = 0.0;           // radians
  std::optional<double> score;       // present only for prediction rows

  bool is_dontcare() const { return category == Category::DontCare; }

  bool operator==(const ObjectLabel&) const = default;
};

/// Camera projection matrix (KITTI P2), row-major 3x4.
///
/// When the third row is (0, 0, 1, *) the left 3x3 block is a plain
/// intrinsic matrix and fu/fv/cu/cv read directly from it; otherwise
/// back-projection falls back to the full inverse of the 3x3 block.
class Calibration {
 public:
  Calibration() = default;
  explicit Calibration(const std::array<double, 12>& row_major);

  double p(int row, int col) const { return p_[static_cast<std::size_t>(row * 4 + col)]; }
  const std::array<double, 12>& data() const { return p_; }

  double fu() const { return p_[0]; }
  double fv() const { return p_[5]; }
  double cu() const { return p_[2]; }
  double cv() const { return p_[6]; }

  /// True when P[2][0..2] == (0, 0, 1) within 1e-9.
  bool canonical_third_row() const { return canonical_; }

 private:
  std::array<double, 12> p_ = {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0};
  bool canonical_ = true;
};

/// Raw per-object head outputs carried by the prediction sidecar. Needed to
/// substitute individual heads during diagnosis; the label file alone only
/// holds the decoded 3D box.
struct RawHeadOutputs {
  std::array<double, 2> coarse_center{};  // heatmap peak (u, v), pixels
  std::array<double, 2> offset2d{};       // coarse center -> 2D box center
  std::array<double, 2> offset3d{};       // coarse center -> projected 3D center
  double depth = 0.0;                     // meters
  std::optional<double> depth_sigma;      // meters
  std::array<double, 3> size3d{};         // h, w, l meters
  std::array<double, 12> heading_bin_logits{};
  double heading_residual = 0.0;          // radians
  double score = 0.0;

  std::array<double, 2> center2d() const {
    return {coarse_center[0] + offset2d[0], coarse_center[1] + offset2d[1]};
  }
  std::array<double, 2> projected_center3d() const {
    return {coarse_center[0] + offset3d[0], coarse_center[1] + offset3d[1]};
  }

  bool operator==(const RawHeadOutputs&) const = default;
};

}  // namespace mono3d
