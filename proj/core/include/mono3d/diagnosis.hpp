#pragma once

#include <span>
#include <string>
#include <vector>

#include "mono3d/evaluation.hpp"
#include "mono3d/geometry.hpp"
#include "mono3d/types.hpp"

namespace mono3d {

/// Which 3D quantity a substitution replaces.
enum class SubField { ProjCenter, Depth, Location3D, Size3D, Orientation };

/// PredWithGt ("w/ gt X"): predictions with field X taken from the matched
/// ground truth. GtWithPred ("w/o gt X"): ground truths, scored 1.0, with
/// field X taken from the matched prediction.
enum class SubDirection { PredWithGt, GtWithPred };

struct SubstitutionSpec {
  SubDirection direction = SubDirection::PredWithGt;
  SubField field = SubField::Location3D;
};

/// One image's inputs for diagnosis. `raw` pairs with `preds` by index and
/// may be empty (projected-center substitutions then fall back to projecting
/// the predicted 3D location, flagged Degraded).
struct DiagFrame {
  std::vector<ObjectLabel> gts;
  std::vector<ObjectLabel> preds;
  std::vector<RawHeadOutputs> raw;
  Calibration calib;
};

struct SubstitutionOutcome {
  std::vector<ImageFrame> frames;  // original gts + hybrid detections
  int matched = 0;
  int unmatched_preds = 0;  // PredWithGt: left as-is
  int unmatched_gts = 0;    // GtWithPred: field kept unsubstituted
  int degraded = 0;         // projected centers recovered without raw outputs
};

/// Reference point whose projection defines the "projected 3D center":
/// the volumetric center (x, y - h/2, z) or the KITTI bottom anchor.
enum class CenterReference { Volumetric, Bottom };

struct DiagnosisRow {
  std::string label;  // table row name, e.g. "w/ gt depth"
  double ap40 = 0.0;
  bool degraded = false;
  int unmatched = 0;
  bool undefined = false;
};

struct DiagnosisReport {
  std::vector<DiagnosisRow> rows;  // baseline, five "w/", ceiling, five "w/o"
  double baseline_ap = 0.0;
  double gt_ceiling_ap = 0.0;  // full substitution
};

struct DepthBucketStats {
  double bucket_center = 0.0;   // meters
  int count = 0;
  double mean_abs_error = 0.0;  // pixels (misalignment) or meters (depth)
  double std_dev = 0.0;         // population
};

struct BucketStatsResult {
  std::vector<DepthBucketStats> buckets;  // only populated buckets
  int skipped = 0;                        // z <= 0 or beyond the last bucket
};

struct MisalignmentOptions {
  double bucket_interval = 10.0;                          // meters
  CenterReference reference = CenterReference::Volumetric;
  double max_center = 90.0;                               // last bucket center
  std::optional<Category> category;                       // no filter when absent
};

/// Builds hybrid detection sets by replacing the requested fields across the
/// matched pred/gt pairs (2D IoU >= match_iou, greedy by score, same
/// category). All specs must share one direction. ProjCenter and Depth
/// re-derive the 3D location through the projection equations, keeping the
/// counterpart quantity predicted. Throws when no pair matches at all.
SubstitutionOutcome substitute(std::span<const DiagFrame> frames,
                               std::span<const SubstitutionSpec> specs,
                               double match_iou = 0.5,
                               CenterReference reference = CenterReference::Volumetric);

/// The full error-analysis grid: baseline, each field substituted in both
/// directions, and the full-substitution ceiling, all scored with ap40
/// under `config` (3D moderate by convention).
DiagnosisReport run_diagnosis_grid(std::span<const DiagFrame> frames, const EvalConfig& config,
                           double match_iou = 0.5,
                           CenterReference reference = CenterReference::Volumetric);

/// 3D displacement caused by an image-plane center shift (du, dv) pixels at
/// depth z: z * sqrt(du^2 + dv^2) / fu.
double loc_error_from_shift(double du, double dv, double z, double fu);

/// IoU of two equal boxes of the given length shifted delta_loc along the
/// length axis: (L - d)/(L + d), 0 once d >= L.
double iou_tolerance(double delta_loc, double length);

/// Depth-bucketed pixel distance between each label's 2D box center and its
/// projected 3D center. Labels with z <= 0 are skipped and counted.
BucketStatsResult misalignment_stats(std::span<const DiagFrame> frames,
                                     const MisalignmentOptions& options);

/// Depth-bucketed |z_pred - z_gt| over matched pred/gt pairs, bucketed by
/// ground-truth depth.
BucketStatsResult depth_error_stats(std::span<const DiagFrame> frames, double bucket_interval,
                                    double match_iou = 0.5);

/// Row labels of the diagnosis grid in table order.
std::vector<std::string> diagnosis_row_labels();

}  // namespace mono3d
