// Shared synthetic-scene builders for the unit, CLI and acceptance suites.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "mono3d/diagnosis.hpp"
#include "mono3d/geometry.hpp"
#include "mono3d/kitti_io.hpp"
#include "mono3d/losses.hpp"
#include "mono3d/types.hpp"

namespace fixtures {

inline mono3d::Calibration make_calib(double f = 707.05, double cu = 604.0, double cv = 180.0) {
  return mono3d::Calibration({f, 0, cu, 0, 0, f, cv, 0, 0, 0, 1, 0});
}

// A real KITTI P2 row, translation column included.
inline mono3d::Calibration kitti_calib() {
  return mono3d::Calibration({707.0493, 0.0, 604.0814, 45.75831, 0.0, 707.0493, 180.5066,
                              -0.3454157, 0.0, 0.0, 1.0, 4.981016e-03});
}

// 2D box enclosing the projected 3D corners.
inline mono3d::Box2D project_box(const mono3d::Box3D& box, const mono3d::Calibration& calib) {
  mono3d::Box2D rect{1e30, 1e30, -1e30, -1e30};
  for (const auto& corner : mono3d::box3d_corners(box)) {
    const auto uv = mono3d::project(corner, calib);
    rect.left = std::min(rect.left, uv[0]);
    rect.top = std::min(rect.top, uv[1]);
    rect.right = std::max(rect.right, uv[0]);
    rect.bottom = std::max(rect.bottom, uv[1]);
  }
  return rect;
}

inline mono3d::ObjectLabel make_car(const mono3d::Box3D& box, const mono3d::Calibration& calib,
                                    std::optional<double> score = std::nullopt) {
  mono3d::ObjectLabel obj;
  obj.category = mono3d::Category::Car;
  obj.truncation = 0.0;
  obj.occlusion = 0;
  obj.h = box.h;
  obj.w = box.w;
  obj.l = box.l;
  obj.x = box.x;
  obj.y = box.y;
  obj.z = box.z;
  obj.rotation_y = box.yaw;
  obj.alpha = mono3d::rotation_y_to_alpha(box.yaw, box.x, box.z);
  obj.box2d = project_box(box, calib);
  obj.score = score;
  return obj;
}

// Plain 2D-only label for metric fixtures.
inline mono3d::ObjectLabel make_box2d_label(double left, double top, double right, double bottom,
                                            std::optional<double> score = std::nullopt,
                                            mono3d::Category category = mono3d::Category::Car) {
  mono3d::ObjectLabel obj;
  obj.category = category;
  obj.box2d = {left, top, right, bottom};
  obj.h = 1.5;
  obj.w = 1.6;
  obj.l = 3.9;
  obj.z = 10.0;
  obj.score = score;
  return obj;
}

struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    path = std::filesystem::temp_directory_path() /
           ("mono3d_" + tag + "_" + std::to_string(rng()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

inline void write_text(const std::filesystem::path& file, const std::string& content) {
  std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  out << content;
}

// --------------------------------------------------------------------------
// Controlled-corruption scene for the substitution diagnosis.
//
// Objects fall into three groups cycling with the object index:
//   index % 4 == 0, 1  -> depth corrupted (several meters), center near-exact
//   index % 4 == 2     -> projected center corrupted (tens of pixels), depth exact
//   index % 4 == 3     -> clean
// Location errors are injected through the projection equations, so raw head
// outputs, decoded locations and ground truths stay mutually consistent.

struct DiagnosisScene {
  std::vector<mono3d::DiagFrame> frames;
  int total_objects = 0;
};

inline DiagnosisScene make_diagnosis_scene(int images = 8, int cars_per_image = 5,
                                           bool with_raw = true) {
  using namespace mono3d;
  const Calibration calib = make_calib();
  DiagnosisScene scene;
  int index = 0;
  for (int img = 0; img < images; ++img) {
    DiagFrame frame;
    frame.calib = calib;
    for (int c = 0; c < cars_per_image; ++c, ++index) {
      const double x = -8.0 + 4.0 * c + 0.3 * img;
      const double z = 12.0 + 3.0 * c + 1.5 * (img % 4);
      Box3D gt_box{x, 1.65, z, 1.53, 1.63, 3.53, normalize_angle(0.3 * index)};
      frame.gts.push_back(make_car(gt_box, calib));

      double dz = 0.0;
      double du = 0.0, dv = 0.0;
      switch (index % 4) {
        case 0:
        case 1:
          dz = (index % 2 == 0 ? 1.0 : -1.0) * (2.0 + 0.4 * (index % 5));
          du = index % 3;
          dv = (index + 1) % 3;
          break;
        case 2:
          du = 20.0 + index % 5;
          dv = 15.0;
          break;
        default:
          break;
      }

      const Point3 gt_center{gt_box.x, gt_box.y - 0.5 * gt_box.h, gt_box.z};
      const PixelPoint gt_cw = project(gt_center, calib);
      const PixelPoint pred_cw{gt_cw[0] + du, gt_cw[1] + dv};
      const double pred_z = gt_box.z + dz;
      const Point3 pred_center = back_project(pred_cw, pred_z, calib);

      Box3D pred_box = gt_box;
      pred_box.x = pred_center[0];
      pred_box.y = pred_center[1] + 0.5 * pred_box.h;
      pred_box.z = pred_center[2];

      ObjectLabel pred = make_car(pred_box, calib, 0.9 - 0.5 * ((index * 7) % 40) / 40.0);
      pred.box2d = frame.gts.back().box2d;  // matching runs on the 2D boxes
      frame.preds.push_back(pred);

      if (with_raw) {
        RawHeadOutputs raw;
        raw.coarse_center = pred_cw;
        raw.offset2d = {0.0, 0.0};
        raw.offset3d = {0.0, 0.0};
        raw.depth = pred_z;
        raw.depth_sigma = 0.8;
        raw.size3d = {pred_box.h, pred_box.w, pred_box.l};
        const HeadingEncoding enc = heading_encode(pred_box.yaw);
        raw.heading_bin_logits[static_cast<std::size_t>(enc.bin_index)] = 10.0;
        raw.heading_residual = enc.residual;
        raw.score = *pred.score;
        frame.raw.push_back(raw);
      }
    }
    scene.frames.push_back(std::move(frame));
    scene.total_objects += cars_per_image;
  }
  return scene;
}

// Serializes a diagnosis scene as KITTI directories for the CLI tests.
inline void write_scene_dirs(const DiagnosisScene& scene, const std::filesystem::path& root,
                             bool with_raw) {
  using namespace mono3d;
  for (std::size_t i = 0; i < scene.frames.size(); ++i) {
    char stem[16];
    std::snprintf(stem, sizeof(stem), "%06zu", i);
    const DiagFrame& frame = scene.frames[i];
    write_text(root / "label_2" / (std::string(stem) + ".txt"), write_label_file(frame.gts));
    write_text(root / "pred" / (std::string(stem) + ".txt"), write_label_file(frame.preds));

    std::string calib_text = "P0: 1 0 0 0 0 1 0 0 0 0 1 0\nP2:";
    for (double v : frame.calib.data()) calib_text += " " + std::to_string(v);
    calib_text += "\n";
    write_text(root / "calib" / (std::string(stem) + ".txt"), calib_text);

    if (with_raw) {
      std::string json = "[";
      for (std::size_t p = 0; p < frame.raw.size(); ++p) {
        const RawHeadOutputs& r = frame.raw[p];
        if (p > 0) json += ",";
        json += "{\"coarse_center\":[" + std::to_string(r.coarse_center[0]) + "," +
                std::to_string(r.coarse_center[1]) + "],";
        json += "\"offset2d\":[0,0],\"offset3d\":[0,0],";
        json += "\"depth\":" + std::to_string(r.depth) + ",";
        json += "\"depth_sigma\":" + std::to_string(r.depth_sigma.value_or(0.8)) + ",";
        json += "\"size3d\":[" + std::to_string(r.size3d[0]) + "," + std::to_string(r.size3d[1]) +
                "," + std::to_string(r.size3d[2]) + "],";
        json += "\"heading_bin_logits\":[";
        for (int b = 0; b < 12; ++b) {
          json += (b ? "," : "") + std::to_string(r.heading_bin_logits[static_cast<std::size_t>(b)]);
        }
        json += "],";
        json += "\"heading_residual\":" + std::to_string(r.heading_residual) + ",";
        json += "\"score\":" + std::to_string(r.score) + "}";
      }
      json += "]\n";
      write_text(root / "raw" / (std::string(stem) + ".json"), json);
    }
  }
}

}  // namespace fixtures
