#include "mono3d/diagnosis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "mono3d/errors.hpp"
#include "mono3d/losses.hpp"

namespace mono3d {

namespace {

Point3 reference_point(const ObjectLabel& o, CenterReference reference) {
  return {o.x, reference == CenterReference::Volumetric ? o.y - 0.5 * o.h : o.y, o.z};
}

void place_at_reference(ObjectLabel& o, const Point3& ref, CenterReference reference) {
  o.x = ref[0];
  o.y = ref[1] + (reference == CenterReference::Volumetric ? 0.5 * o.h : 0.0);
  o.z = ref[2];
}

// Greedy same-category matching on 2D IoU, predictions in descending score
// order. Returns gt index per prediction, -1 when unmatched.
std::vector<int> match_for_diagnosis(const std::vector<ObjectLabel>& gts,
                                     const std::vector<ObjectLabel>& preds, double match_iou) {
  std::vector<int> matched(preds.size(), -1);
  std::vector<int> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const double sa = preds[static_cast<std::size_t>(a)].score.value_or(
        -std::numeric_limits<double>::infinity());
    const double sb = preds[static_cast<std::size_t>(b)].score.value_or(
        -std::numeric_limits<double>::infinity());
    return sa > sb;
  });
  std::vector<bool> claimed(gts.size(), false);
  for (int pi : order) {
    const ObjectLabel& pred = preds[static_cast<std::size_t>(pi)];
    if (pred.is_dontcare()) continue;
    int best = -1;
    double best_iou = -1.0;
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
      if (claimed[gi] || gts[gi].is_dontcare() || gts[gi].category != pred.category) continue;
      const double iou = iou_2d(gts[gi].box2d, pred.box2d);
      if (iou >= match_iou && iou > best_iou) {
        best_iou = iou;
        best = static_cast<int>(gi);
      }
    }
    if (best >= 0) {
      claimed[static_cast<std::size_t>(best)] = true;
      matched[static_cast<std::size_t>(pi)] = best;
    }
  }
  return matched;
}

struct FieldSet {
  bool proj_center = false;
  bool depth = false;
  bool location = false;
  bool size = false;
  bool orientation = false;
};

// Projected 3D center of a prediction: the raw head output when available,
// otherwise the projection of the decoded 3D location (degraded).
PixelPoint predicted_center(const ObjectLabel& pred, const RawHeadOutputs* raw,
                            const Calibration& calib, CenterReference reference,
                            int& degraded) {
  if (raw != nullptr) return raw->projected_center3d();
  ++degraded;
  return project(reference_point(pred, reference), calib);
}

void recompute_alpha(ObjectLabel& o) {
  o.alpha = rotation_y_to_alpha(o.rotation_y, o.x, o.z);
}

}  // namespace

std::vector<std::string> diagnosis_row_labels() {
  return {
      "baseline",
      "w/ gt proj. center",
      "w/ gt depth",
      "w/ gt 3D location",
      "w/ gt 3D size",
      "w/ gt orientation",
      "ground truth",
      "w/o gt proj. center",
      "w/o gt depth",
      "w/o gt 3D location",
      "w/o gt 3D size",
      "w/o gt orientation",
  };
}

SubstitutionOutcome substitute(std::span<const DiagFrame> frames,
                               std::span<const SubstitutionSpec> specs, double match_iou,
                               CenterReference reference) {
  SubstitutionOutcome outcome;
  outcome.frames.reserve(frames.size());

  if (specs.empty()) {
    for (const DiagFrame& frame : frames) {
      outcome.frames.push_back({frame.gts, frame.preds});
    }
    return outcome;
  }

  const SubDirection direction = specs.front().direction;
  FieldSet fields;
  for (const SubstitutionSpec& spec : specs) {
    if (spec.direction != direction) {
      throw InvalidArgument("substitution specs must share one direction");
    }
    switch (spec.field) {
      case SubField::ProjCenter: fields.proj_center = true; break;
      case SubField::Depth: fields.depth = true; break;
      case SubField::Location3D: fields.location = true; break;
      case SubField::Size3D: fields.size = true; break;
      case SubField::Orientation: fields.orientation = true; break;
    }
  }

  for (const DiagFrame& frame : frames) {
    const std::vector<int> matched = match_for_diagnosis(frame.gts, frame.preds, match_iou);
    std::vector<ObjectLabel> hybrid;

    if (direction == SubDirection::PredWithGt) {
      hybrid = frame.preds;
      for (std::size_t pi = 0; pi < hybrid.size(); ++pi) {
        const int gi = matched[pi];
        if (gi < 0) {
          ++outcome.unmatched_preds;
          continue;
        }
        ++outcome.matched;
        ObjectLabel& out = hybrid[pi];
        const ObjectLabel& gt = frame.gts[static_cast<std::size_t>(gi)];
        const RawHeadOutputs* raw = pi < frame.raw.size() ? &frame.raw[pi] : nullptr;

        // Fixed application order; Location3D overrides the re-projected
        // coordinates when combined with ProjCenter/Depth.
        if (fields.proj_center) {
          const PixelPoint gt_center = project(reference_point(gt, reference), frame.calib);
          place_at_reference(out, back_project(gt_center, out.z, frame.calib), reference);
        }
        if (fields.depth) {
          const PixelPoint pred_center =
              predicted_center(frame.preds[pi], raw, frame.calib, reference, outcome.degraded);
          place_at_reference(out, back_project(pred_center, gt.z, frame.calib), reference);
        }
        if (fields.location) {
          out.x = gt.x;
          out.y = gt.y;
          out.z = gt.z;
        }
        if (fields.size) {
          out.h = gt.h;
          out.w = gt.w;
          out.l = gt.l;
        }
        if (fields.orientation) {
          out.rotation_y = gt.rotation_y;
        }
        if (fields.orientation || fields.proj_center || fields.depth || fields.location) {
          recompute_alpha(out);
        }
      }
    } else {
      // GtWithPred: ground truths become the detections, scored 1.0.
      std::vector<int> gt_to_pred(frame.gts.size(), -1);
      for (std::size_t pi = 0; pi < matched.size(); ++pi) {
        if (matched[pi] >= 0) gt_to_pred[static_cast<std::size_t>(matched[pi])] = static_cast<int>(pi);
      }
      for (std::size_t gi = 0; gi < frame.gts.size(); ++gi) {
        if (frame.gts[gi].is_dontcare()) continue;
        ObjectLabel out = frame.gts[gi];
        out.score = 1.0;
        const int pi = gt_to_pred[gi];
        if (pi < 0) {
          ++outcome.unmatched_gts;
          hybrid.push_back(out);
          continue;
        }
        ++outcome.matched;
        const ObjectLabel& pred = frame.preds[static_cast<std::size_t>(pi)];
        const RawHeadOutputs* raw =
            static_cast<std::size_t>(pi) < frame.raw.size() ? &frame.raw[static_cast<std::size_t>(pi)] : nullptr;

        if (fields.proj_center) {
          const PixelPoint pred_center =
              predicted_center(pred, raw, frame.calib, reference, outcome.degraded);
          place_at_reference(out, back_project(pred_center, out.z, frame.calib), reference);
        }
        if (fields.depth) {
          const PixelPoint gt_center =
              project(reference_point(frame.gts[gi], reference), frame.calib);
          place_at_reference(out, back_project(gt_center, pred.z, frame.calib), reference);
        }
        if (fields.location) {
          out.x = pred.x;
          out.y = pred.y;
          out.z = pred.z;
        }
        if (fields.size) {
          out.h = pred.h;
          out.w = pred.w;
          out.l = pred.l;
        }
        if (fields.orientation) {
          out.rotation_y = pred.rotation_y;
        }
        if (fields.orientation || fields.proj_center || fields.depth || fields.location) {
          recompute_alpha(out);
        }
        hybrid.push_back(out);
      }
    }
    outcome.frames.push_back({frame.gts, std::move(hybrid)});
  }

  if (outcome.matched == 0) {
    throw Error("substitution found no matching prediction/ground-truth pair");
  }
  return outcome;
}

DiagnosisReport run_diagnosis_grid(std::span<const DiagFrame> frames, const EvalConfig& config,
                           double match_iou, CenterReference reference) {
  DiagnosisReport report;

  auto evaluate_frames = [&](const std::vector<ImageFrame>& eval_frames) {
    return ap40(eval_frames, config);
  };

  auto add_row = [&](const std::string& label, const SubstitutionOutcome& outcome,
                     int unmatched) {
    const EvalResult r = evaluate_frames(outcome.frames);
    report.rows.push_back({label, r.ap40, outcome.degraded > 0, unmatched, r.undefined});
    return r.ap40;
  };

  SubstitutionOutcome baseline;
  for (const DiagFrame& frame : frames) baseline.frames.push_back({frame.gts, frame.preds});
  report.baseline_ap = add_row("baseline", baseline, 0);

  const SubField all_fields[5] = {SubField::ProjCenter, SubField::Depth, SubField::Location3D,
                                  SubField::Size3D, SubField::Orientation};
  const char* with_labels[5] = {"w/ gt proj. center", "w/ gt depth", "w/ gt 3D location",
                                "w/ gt 3D size", "w/ gt orientation"};
  const char* without_labels[5] = {"w/o gt proj. center", "w/o gt depth", "w/o gt 3D location",
                                   "w/o gt 3D size", "w/o gt orientation"};

  for (int f = 0; f < 5; ++f) {
    const SubstitutionSpec spec{SubDirection::PredWithGt, all_fields[f]};
    const auto outcome = substitute(frames, std::span(&spec, 1), match_iou, reference);
    add_row(with_labels[f], outcome, outcome.unmatched_preds);
  }

  {
    std::vector<SubstitutionSpec> full;
    for (SubField f : all_fields) full.push_back({SubDirection::PredWithGt, f});
    const auto outcome = substitute(frames, full, match_iou, reference);
    report.gt_ceiling_ap = add_row("ground truth", outcome, outcome.unmatched_preds);
  }

  for (int f = 0; f < 5; ++f) {
    const SubstitutionSpec spec{SubDirection::GtWithPred, all_fields[f]};
    const auto outcome = substitute(frames, std::span(&spec, 1), match_iou, reference);
    add_row(without_labels[f], outcome, outcome.unmatched_gts);
  }

  return report;
}

double loc_error_from_shift(double du, double dv, double z, double fu) {
  return z * std::hypot(du, dv) / fu;
}

double iou_tolerance(double delta_loc, double length) {
  if (delta_loc >= length) return 0.0;
  return (length - delta_loc) / (length + delta_loc);
}

namespace {

class BucketAccumulator {
 public:
  explicit BucketAccumulator(double interval, double max_center)
      : interval_(interval), max_center_(max_center) {}

  void add(double depth, double value) {
    if (depth <= 0.0) {
      ++skipped_;
      return;
    }
    const int k = static_cast<int>(std::floor(depth / interval_ + 0.5));
    const double center = k * interval_;
    if (center > max_center_ + 1e-9) {
      ++skipped_;
      return;
    }
    values_[k].push_back(value);
  }

  BucketStatsResult finish() const {
    BucketStatsResult out;
    out.skipped = skipped_;
    for (const auto& [k, values] : values_) {
      DepthBucketStats stats;
      stats.bucket_center = k * interval_;
      stats.count = static_cast<int>(values.size());
      const double mean =
          std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
      double var = 0.0;
      for (double v : values) var += (v - mean) * (v - mean);
      stats.mean_abs_error = mean;
      stats.std_dev = std::sqrt(var / static_cast<double>(values.size()));
      out.buckets.push_back(stats);
    }
    return out;
  }

 private:
  double interval_;
  double max_center_;
  int skipped_ = 0;
  std::map<int, std::vector<double>> values_;
};

}  // namespace

BucketStatsResult misalignment_stats(std::span<const DiagFrame> frames,
                                     const MisalignmentOptions& options) {
  if (!(options.bucket_interval > 0.0)) {
    throw InvalidArgument("bucket interval must be positive");
  }
  BucketAccumulator acc(options.bucket_interval, options.max_center);
  for (const DiagFrame& frame : frames) {
    for (const ObjectLabel& gt : frame.gts) {
      if (gt.is_dontcare()) continue;
      if (options.category && gt.category != *options.category) continue;
      if (gt.z <= 0.0) {
        acc.add(gt.z, 0.0);  // records the skip
        continue;
      }
      const PixelPoint projected =
          project(reference_point(gt, options.reference), frame.calib);
      const double du = gt.box2d.center_u() - projected[0];
      const double dv = gt.box2d.center_v() - projected[1];
      acc.add(gt.z, std::hypot(du, dv));
    }
  }
  return acc.finish();
}

BucketStatsResult depth_error_stats(std::span<const DiagFrame> frames, double bucket_interval,
                                    double match_iou) {
  if (!(bucket_interval > 0.0)) {
    throw InvalidArgument("bucket interval must be positive");
  }
  BucketAccumulator acc(bucket_interval, 90.0);
  for (const DiagFrame& frame : frames) {
    const std::vector<int> matched = match_for_diagnosis(frame.gts, frame.preds, match_iou);
    for (std::size_t pi = 0; pi < matched.size(); ++pi) {
      if (matched[pi] < 0) continue;
      const ObjectLabel& gt = frame.gts[static_cast<std::size_t>(matched[pi])];
      acc.add(gt.z, std::abs(frame.preds[pi].z - gt.z));
    }
  }
  return acc.finish();
}

}  // namespace mono3d
