#include "mono3d/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "mono3d/errors.hpp"

namespace mono3d {

namespace {

// Collinearity tolerance for the polygon clipper.
constexpr double kClipEps = 1e-9;

struct Pt {
  double x, z;
};

// Cross product of (b - a) x (p - a); > 0 when p lies left of a->b.
double cross(const Pt& a, const Pt& b, const Pt& p) {
  return (b.x - a.x) * (p.z - a.z) - (b.z - a.z) * (p.x - a.x);
}

// Sutherland-Hodgman: clips `subject` against the CCW convex polygon
// `clip`. Points within kClipEps of an edge count as inside.
std::vector<Pt> clip_convex(const std::vector<Pt>& subject, const BevPolygon& clip) {
  std::vector<Pt> output = subject;
  std::vector<Pt> input;
  for (int e = 0; e < 4 && !output.empty(); ++e) {
    const Pt a{clip.vertices[static_cast<std::size_t>(e)][0],
               clip.vertices[static_cast<std::size_t>(e)][1]};
    const Pt b{clip.vertices[static_cast<std::size_t>((e + 1) % 4)][0],
               clip.vertices[static_cast<std::size_t>((e + 1) % 4)][1]};
    input = std::move(output);
    output.clear();
    const std::size_t n = input.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Pt& cur = input[i];
      const Pt& prev = input[(i + n - 1) % n];
      const double d_cur = cross(a, b, cur);
      const double d_prev = cross(a, b, prev);
      const bool cur_in = d_cur >= -kClipEps;
      const bool prev_in = d_prev >= -kClipEps;
      if (cur_in != prev_in && std::abs(d_prev - d_cur) > kClipEps) {
        const double t = d_prev / (d_prev - d_cur);
        output.push_back({prev.x + t * (cur.x - prev.x), prev.z + t * (cur.z - prev.z)});
      }
      if (cur_in) output.push_back(cur);
    }
  }
  return output;
}

double area_of(const std::vector<Pt>& poly) {
  if (poly.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Pt& p = poly[i];
    const Pt& q = poly[(i + 1) % poly.size()];
    twice += p.x * q.z - q.x * p.z;
  }
  return std::max(0.0, 0.5 * twice);
}

double bev_intersection_area(const Box3D& a, const Box3D& b) {
  const BevPolygon pa = bev_polygon(a);
  const BevPolygon pb = bev_polygon(b);
  std::vector<Pt> subject;
  subject.reserve(4);
  for (const auto& v : pa.vertices) subject.push_back({v[0], v[1]});
  return area_of(clip_convex(subject, pb));
}

double rect_intersection_area(const Box2D& a, const Box2D& b) {
  const double iw = std::min(a.right, b.right) - std::max(a.left, b.left);
  if (iw <= 0.0) return 0.0;
  const double ih = std::min(a.bottom, b.bottom) - std::max(a.top, b.top);
  if (ih <= 0.0) return 0.0;
  return iw * ih;
}

bool bev_contains(const Box3D& box, double cos_yaw, double sin_yaw, double px, double pz) {
  const double dx = px - box.x;
  const double dz = pz - box.z;
  const double local_x = cos_yaw * dx - sin_yaw * dz;
  const double local_z = sin_yaw * dx + cos_yaw * dz;
  return std::abs(local_x) <= 0.5 * box.l && std::abs(local_z) <= 0.5 * box.w;
}

}  // namespace

std::array<Point3, 8> box3d_corners(const Box3D& box) {
  // Local footprint (dx, dz), walked so that corners 0..3 are the bottom
  // face and 4..7 the top face.
  static constexpr double sx[4] = {0.5, 0.5, -0.5, -0.5};
  static constexpr double sz[4] = {0.5, -0.5, -0.5, 0.5};
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  std::array<Point3, 8> corners;
  for (int i = 0; i < 8; ++i) {
    const double dx = sx[i % 4] * box.l;
    const double dz = sz[i % 4] * box.w;
    corners[static_cast<std::size_t>(i)] = {
        box.x + c * dx + s * dz,
        box.y - (i >= 4 ? box.h : 0.0),
        box.z - s * dx + c * dz,
    };
  }
  return corners;
}

BevPolygon bev_polygon(const Box3D& box) {
  const auto corners = box3d_corners(box);
  // Bottom corners 0,1,2,3 walk the footprint clockwise in (x, z); reverse
  // for the positive-area convention.
  BevPolygon poly;
  const int order[4] = {0, 3, 2, 1};
  for (int i = 0; i < 4; ++i) {
    const auto& c = corners[static_cast<std::size_t>(order[i])];
    poly.vertices[static_cast<std::size_t>(i)] = {c[0], c[2]};
  }
  return poly;
}

double polygon_area(std::span<const std::array<double, 2>> vertices) {
  if (vertices.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const auto& p = vertices[i];
    const auto& q = vertices[(i + 1) % vertices.size()];
    twice += p[0] * q[1] - q[0] * p[1];
  }
  return 0.5 * twice;
}

PixelPoint project(const Point3& point, const Calibration& calib) {
  if (point[2] <= 0.0) {
    throw BehindCamera("cannot project a point with z <= 0");
  }
  const auto& p = calib.data();
  const double uh = p[0] * point[0] + p[1] * point[1] + p[2] * point[2] + p[3];
  const double vh = p[4] * point[0] + p[5] * point[1] + p[6] * point[2] + p[7];
  const double wh = p[8] * point[0] + p[9] * point[1] + p[10] * point[2] + p[11];
  if (wh <= 0.0) {
    throw BehindCamera("projective depth is non-positive");
  }
  return {uh / wh, vh / wh};
}

Point3 back_project(const PixelPoint& pixel, double depth, const Calibration& calib) {
  if (depth <= 0.0) {
    throw BehindCamera("cannot back-project to depth <= 0");
  }
  const auto& p = calib.data();

  if (calib.canonical_third_row() && std::abs(p[4]) <= 1e-9) {
    // Upper-triangular intrinsics: direct back substitution keeps the
    // z component bit-exact.
    const double lambda = depth + p[11];
    const double y = (pixel[1] * lambda - p[7] - p[6] * depth) / p[5];
    const double x = (pixel[0] * lambda - p[3] - p[1] * y - p[2] * depth) / p[0];
    return {x, y, depth};
  }

  Eigen::Matrix3d m;
  m << p[0], p[1], p[2], p[4], p[5], p[6], p[8], p[9], p[10];
  if (std::abs(m.determinant()) < 1e-12) {
    throw SingularIntrinsics("3x3 block of P is not invertible");
  }
  const Eigen::Matrix3d m_inv = m.inverse();
  const Eigen::Vector3d b = m_inv * Eigen::Vector3d(p[3], p[7], p[11]);
  const Eigen::Vector3d ray = m_inv * Eigen::Vector3d(pixel[0], pixel[1], 1.0);
  if (std::abs(ray[2]) < 1e-15) {
    throw BehindCamera("viewing ray never reaches the requested depth");
  }
  const double lambda = (depth + b[2]) / ray[2];
  const Eigen::Vector3d point = lambda * ray - b;
  return {point[0], point[1], depth};
}

double iou_2d(const Box2D& a, const Box2D& b) {
  const double inter = rect_intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double overlap_over_first(const Box2D& pred, const Box2D& region) {
  const double area = pred.area();
  if (area <= 0.0) return 0.0;
  return std::clamp(rect_intersection_area(pred, region) / area, 0.0, 1.0);
}

double iou_bev(const Box3D& a, const Box3D& b) {
  const double inter = bev_intersection_area(a, b);
  const double uni = a.w * a.l + b.w * b.l - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double iou_3d(const Box3D& a, const Box3D& b) {
  const double y_overlap = std::min(a.y, b.y) - std::max(a.y - a.h, b.y - b.h);
  if (y_overlap <= 0.0) return 0.0;
  const double inter = bev_intersection_area(a, b) * y_overlap;
  const double uni = a.volume() + b.volume() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double iou_3d_axis_aligned(const std::array<double, 3>& s, const std::array<double, 3>& s_star) {
  double inter = 1.0;
  double vol = 1.0;
  double vol_star = 1.0;
  for (int i = 0; i < 3; ++i) {
    inter *= std::min(s[static_cast<std::size_t>(i)], s_star[static_cast<std::size_t>(i)]);
    vol *= s[static_cast<std::size_t>(i)];
    vol_star *= s_star[static_cast<std::size_t>(i)];
  }
  const double uni = vol + vol_star - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double iou_3d_oracle(const Box3D& a, const Box3D& b, int resolution) {
  if (resolution < 32) {
    throw InvalidArgument("oracle resolution must be at least 32");
  }
  double lo[3] = {1e300, 1e300, 1e300};
  double hi[3] = {-1e300, -1e300, -1e300};
  for (const Box3D* box : {&a, &b}) {
    for (const auto& c : box3d_corners(*box)) {
      for (int d = 0; d < 3; ++d) {
        lo[d] = std::min(lo[d], c[static_cast<std::size_t>(d)]);
        hi[d] = std::max(hi[d], c[static_cast<std::size_t>(d)]);
      }
    }
  }
  const int n = resolution;
  const double dx = (hi[0] - lo[0]) / n;
  const double dy = (hi[1] - lo[1]) / n;
  const double dz = (hi[2] - lo[2]) / n;

  // The boxes rotate about y only, so a grid column (x, z) is inside a box
  // for a y-count that does not depend on the column. Counting columns in
  // the BEV footprints and multiplying by per-box y-row counts reproduces
  // the full resolution^3 sweep exactly.
  auto rows_in = [&](double y_min, double y_max) {
    int count = 0;
    for (int j = 0; j < n; ++j) {
      const double y = lo[1] + (j + 0.5) * dy;
      if (y >= y_min && y <= y_max) ++count;
    }
    return count;
  };
  const int rows_a = rows_in(a.y - a.h, a.y);
  const int rows_b = rows_in(b.y - b.h, b.y);
  const int rows_both = rows_in(std::max(a.y - a.h, b.y - b.h), std::min(a.y, b.y));

  const double ca = std::cos(a.yaw), sa = std::sin(a.yaw);
  const double cb = std::cos(b.yaw), sb = std::sin(b.yaw);
  long long both = 0;
  long long either = 0;
  for (int i = 0; i < n; ++i) {
    const double x = lo[0] + (i + 0.5) * dx;
    for (int k = 0; k < n; ++k) {
      const double z = lo[2] + (k + 0.5) * dz;
      const bool in_a = bev_contains(a, ca, sa, x, z);
      const bool in_b = bev_contains(b, cb, sb, x, z);
      if (in_a) either += rows_a;
      if (in_b) either += rows_b;
      if (in_a && in_b) {
        both += rows_both;
        either -= rows_both;
      }
    }
  }
  if (either <= 0) return 0.0;
  return static_cast<double>(both) / static_cast<double>(either);
}

}  // namespace mono3d
