// Test-only oracles, kept independent of the library paths they validate.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "mono3d/evaluation.hpp"
#include "mono3d/geometry.hpp"
#include "mono3d/types.hpp"

namespace oracles {

// Projection through the full 4x4 homogeneous pipeline: [P; 0 0 0 1] times
// (x, y, z, 1), then the perspective divide.
inline std::array<double, 2> project_homogeneous(const std::array<double, 3>& point,
                                                 const std::array<double, 12>& p) {
  double m[16];
  std::copy(p.begin(), p.end(), m);
  m[12] = 0.0;
  m[13] = 0.0;
  m[14] = 0.0;
  m[15] = 1.0;
  const double h[4] = {point[0], point[1], point[2], 1.0};
  double r[4] = {0, 0, 0, 0};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) r[i] += m[i * 4 + j] * h[j];
  }
  return {r[0] / r[2], r[1] / r[2]};
}

// Golden-section search for the minimizer of a unimodal function on [lo, hi].
inline double golden_min(const std::function<double(double)>& f, double lo, double hi,
                         int iterations = 200) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iterations; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// Box pair distributed per the validation protocol: dimensions in [0.5, 5],
// yaw uniform, second center offset by up to +-3 m per axis.
inline std::pair<mono3d::Box3D, mono3d::Box3D> random_box_pair(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dim(0.5, 5.0);
  std::uniform_real_distribution<double> yaw(-M_PI, M_PI);
  std::uniform_real_distribution<double> center(-2.0, 2.0);
  std::uniform_real_distribution<double> offset(-3.0, 3.0);
  mono3d::Box3D a{center(rng), center(rng), center(rng), dim(rng), dim(rng), dim(rng), yaw(rng)};
  mono3d::Box3D b{a.x + offset(rng), a.y + offset(rng), a.z + offset(rng),
                  dim(rng), dim(rng), dim(rng), yaw(rng)};
  return {a, b};
}

// Brute-force AP40: re-runs a fresh greedy matching at every distinct score
// cutoff and interpolates precision over the 40 recall positions. Written
// directly from the matching protocol, independent of the library's
// single-pass sweep.
inline double ap40_enumeration(const std::vector<mono3d::ImageFrame>& frames,
                               const mono3d::EvalConfig& config) {
  using namespace mono3d;

  std::vector<double> cutoffs;
  int n_gt = 0;
  for (const ImageFrame& frame : frames) {
    for (const ObjectLabel& gt : frame.gts) {
      if (difficulty_filter(gt, config.category, config.difficulty) == GtStatus::Counted) {
        ++n_gt;
      }
    }
    for (const ObjectLabel& pred : frame.preds) {
      if (pred.category == config.category && pred.score) cutoffs.push_back(*pred.score);
    }
  }
  if (n_gt == 0) return 0.0;
  std::sort(cutoffs.begin(), cutoffs.end(), std::greater<>());
  cutoffs.erase(std::unique(cutoffs.begin(), cutoffs.end()), cutoffs.end());

  struct Point {
    double recall, precision;
  };
  std::vector<Point> points;
  for (double cutoff : cutoffs) {
    int tp = 0, fp = 0;
    for (const ImageFrame& frame : frames) {
      std::vector<const ObjectLabel*> preds;
      for (const ObjectLabel& pred : frame.preds) {
        if (pred.category == config.category && pred.score && *pred.score >= cutoff) {
          preds.push_back(&pred);
        }
      }
      std::stable_sort(preds.begin(), preds.end(), [](const ObjectLabel* x, const ObjectLabel* y) {
        return *x->score > *y->score;
      });
      std::vector<bool> claimed(frame.gts.size(), false);
      for (const ObjectLabel* pred : preds) {
        int best = -1;
        double best_iou = -1.0;
        for (std::size_t g = 0; g < frame.gts.size(); ++g) {
          if (claimed[g]) continue;
          if (difficulty_filter(frame.gts[g], config.category, config.difficulty) !=
              GtStatus::Counted) {
            continue;
          }
          const double iou = task_iou(config.task, frame.gts[g], *pred);
          if (iou >= config.iou_threshold && iou > best_iou) {
            best_iou = iou;
            best = static_cast<int>(g);
          }
        }
        if (best >= 0) {
          claimed[static_cast<std::size_t>(best)] = true;
          ++tp;
          continue;
        }
        bool shielded = false;
        for (std::size_t g = 0; g < frame.gts.size() && !shielded; ++g) {
          if (difficulty_filter(frame.gts[g], config.category, config.difficulty) !=
              GtStatus::Ignored) {
            continue;
          }
          const double overlap = frame.gts[g].is_dontcare()
                                     ? overlap_over_first(pred->box2d, frame.gts[g].box2d)
                                     : task_iou(config.task, frame.gts[g], *pred);
          shielded = overlap >= config.iou_threshold;
        }
        if (!shielded) ++fp;
      }
    }
    if (tp + fp > 0) {
      points.push_back({static_cast<double>(tp) / n_gt,
                        static_cast<double>(tp) / static_cast<double>(tp + fp)});
    }
  }

  double sum = 0.0;
  for (int k = 1; k <= 40; ++k) {
    const double target = static_cast<double>(k) / 40.0;
    double best = 0.0;
    for (const Point& pt : points) {
      if (pt.recall >= target - 1e-12) best = std::max(best, pt.precision);
    }
    sum += best;
  }
  return sum / 40.0 * 100.0;
}

}  // namespace oracles
