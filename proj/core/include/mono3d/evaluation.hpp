#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mono3d/geometry.hpp"
#include "mono3d/types.hpp"

namespace mono3d {

enum class Task { Detect2D, BEV, Detect3D, AOS };
enum class Difficulty { Easy, Moderate, Hard };

/// Ground-truth roles under a difficulty setting. Counted boxes can match
/// and count as FN when missed; Ignored boxes (harder tiers, DontCare)
/// neither reward nor penalize; Excluded boxes (other categories) are
/// removed from the evaluation entirely.
enum class GtStatus { Counted, Ignored, Excluded };

/// Order of difficulty filtering vs depth bucketing in range-wise runs.
/// DifficultyThenBucket demotes out-of-bucket Counted GTs to Ignored;
/// BucketThenDifficulty removes out-of-bucket GTs before filtering (so they
/// no longer shield overlapping predictions).
enum class RangeFilterOrder { DifficultyThenBucket, BucketThenDifficulty };

struct DepthBucket {
  double center = 0.0;      // meters
  double half_width = 0.0;  // meters; membership is [center-hw, center+hw)
};

struct EvalConfig {
  Task task = Task::Detect3D;
  Category category = Category::Car;
  double iou_threshold = 0.7;
  Difficulty difficulty = Difficulty::Moderate;
  std::optional<DepthBucket> depth_bucket;
  RangeFilterOrder range_order = RangeFilterOrder::DifficultyThenBucket;
};

/// Ground truths and predictions of one image.
struct ImageFrame {
  std::vector<ObjectLabel> gts;
  std::vector<ObjectLabel> preds;
};

struct MatchRecord {
  int image = 0;
  int gt = 0;
  int pred = 0;
  double iou = 0.0;

  bool operator==(const MatchRecord&) const = default;
};

struct EvalCounts {
  int num_gt = 0;       // Counted ground truths
  int num_pred = 0;     // evaluated predictions (category-filtered)
  int num_ignored = 0;  // Ignored ground truths

  bool operator==(const EvalCounts&) const = default;
};

struct EvalResult {
  double ap40 = 0.0;  // percent; orientation similarity for Task::AOS
  std::array<double, 40> precision_at_recall{};
  std::vector<MatchRecord> matched_pairs;
  EvalCounts counts;
  bool undefined = false;  // no Counted GT under this config

  bool operator==(const EvalResult&) const = default;
};

/// Per-prediction outcome of one matching pass.
enum class PredOutcome { TruePositive, FalsePositive, IgnoredOverlap };

struct MatchResult {
  std::vector<PredOutcome> outcomes;  // indexed like the input predictions
  std::vector<int> matched_gt;        // gt index per prediction, -1 if none
  std::vector<MatchRecord> pairs;     // true positives (image field unset)
  int counted_gts = 0;
};

using IouFn = std::function<double(const ObjectLabel& gt, const ObjectLabel& pred)>;

/// KITTI difficulty tiers: Easy requires 2D height >= 40 px, occlusion <= 0,
/// truncation <= 0.15; Moderate >= 25 px, <= 1, <= 0.30; Hard >= 25 px,
/// <= 2, <= 0.50. Same-category boxes failing the tier are Ignored, DontCare
/// is Ignored, other categories are Excluded.
GtStatus difficulty_filter(const ObjectLabel& label, Category target, Difficulty difficulty);

/// Greedy matching: predictions in descending score order (ties by input
/// index) claim the unclaimed Counted GT of highest IoU >= threshold.
/// Unmatched predictions overlapping an Ignored GT (or a DontCare region,
/// tested as 2D area fraction) are IgnoredOverlap instead of FP.
MatchResult match_detections(std::span<const ObjectLabel> gts, std::span<const ObjectLabel> preds,
                             const IouFn& iou_fn, double threshold,
                             std::span<const GtStatus> gt_status);

/// IoU measure used by a task (2D rectangles, BEV footprints or 3D boxes).
double task_iou(Task task, const ObjectLabel& gt, const ObjectLabel& pred);

/// AP40: interpolated precision max_{r' >= r} p(r') averaged over the 40
/// recall positions {1/40, ..., 1}, times 100. With zero Counted GTs the
/// result is 0 and flagged undefined.
EvalResult ap40(std::span<const ImageFrame> frames, const EvalConfig& config);

/// AOS: the AP40 sweep on 2D matching where each true positive contributes
/// (1 + cos(delta alpha)) / 2 instead of 1.
EvalResult aos(std::span<const ImageFrame> frames, const EvalConfig& config);

/// Range-wise protocol: evaluates depth buckets [c - i/2, c + i/2) at
/// centers {i, 2i, ...} covering [0, 90] m. Out-of-bucket GTs are Ignored
/// (not FN) and out-of-bucket predictions dropped, per config.range_order.
std::vector<std::pair<double, EvalResult>> rangewise_eval(std::span<const ImageFrame> frames,
                                                          const EvalConfig& config,
                                                          double interval);

}  // namespace mono3d
