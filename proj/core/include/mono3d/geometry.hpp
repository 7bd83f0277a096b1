#pragma once

#include <array>
#include <span>
#include <vector>

#include "mono3d/types.hpp"

namespace mono3d {

using PixelPoint = std::array<double, 2>;  // (u, v)
using Point3 = std::array<double, 3>;      // (x, y, z) camera frame

/// Oriented 3D box: bottom-face center, dimensions, yaw about the camera
/// y axis. Vertical extent is [y - h, y] (y points down).
struct Box3D {
  double x = 0.0, y = 0.0, z = 0.0;
  double h = 0.0, w = 0.0, l = 0.0;
  double yaw = 0.0;

  static Box3D from_label(const ObjectLabel& o) {
    return {o.x, o.y, o.z, o.h, o.w, o.l, o.rotation_y};
  }
  double volume() const { return h * w * l; }

  bool operator==(const Box3D&) const = default;
};

/// Ground-plane footprint of a Box3D: 4 (x, z) vertices, counter-clockwise,
/// signed area > 0.
struct BevPolygon {
  std::array<std::array<double, 2>, 4> vertices{};
};

/// Box corners, fixed order: indices 0-3 walk the bottom face (y = box.y)
/// starting at local (+l/2, +w/2) with z decreasing first, indices 4-7 the
/// top face (y = box.y - h) in the same horizontal order.
std::array<Point3, 8> box3d_corners(const Box3D& box);

BevPolygon bev_polygon(const Box3D& box);

/// Perspective projection of a camera-frame point through P.
/// Throws BehindCamera when point z <= 0.
PixelPoint project(const Point3& point, const Calibration& calib);

/// Inverse of project at a known depth: recovers the camera-frame point
/// whose z equals `depth` and which projects to `pixel`. Accounts for P's
/// translation column. Throws BehindCamera (depth <= 0) or
/// SingularIntrinsics (non-invertible 3x3 block).
Point3 back_project(const PixelPoint& pixel, double depth, const Calibration& calib);

/// Rectangle intersection-over-union. Degenerate boxes give 0.
double iou_2d(const Box2D& a, const Box2D& b);

/// Fraction of `pred`'s area covered by `region` (KITTI DontCare test).
double overlap_over_first(const Box2D& pred, const Box2D& region);

/// IoU of the rotated ground-plane footprints (convex clipping + shoelace).
double iou_bev(const Box3D& a, const Box3D& b);

/// Rotated 3D IoU: BEV intersection area times vertical overlap.
double iou_3d(const Box3D& a, const Box3D& b);

/// 3D IoU of co-located, co-oriented, bottom-anchored boxes as a function of
/// the two size triples only: prod(min) / (V + V* - prod(min)).
double iou_3d_axis_aligned(const std::array<double, 3>& s, const std::array<double, 3>& s_star);

/// Deterministic grid-sampling estimate of iou_3d: resolution^3 cell centers
/// over the union's axis-aligned bounding volume, counting membership.
double iou_3d_oracle(const Box3D& a, const Box3D& b, int resolution);

/// Signed shoelace area of a polygon in the (x, z) plane.
double polygon_area(std::span<const std::array<double, 2>> vertices);

}  // namespace mono3d
