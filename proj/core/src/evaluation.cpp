#include "mono3d/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mono3d/errors.hpp"

namespace mono3d {

namespace {

constexpr double kMinHeight[3] = {40.0, 25.0, 25.0};
constexpr int kMaxOcclusion[3] = {0, 1, 2};
constexpr double kMaxTruncation[3] = {0.15, 0.30, 0.50};

double score_of(const ObjectLabel& o) {
  return o.score.value_or(-std::numeric_limits<double>::infinity());
}

bool in_bucket(double z, const DepthBucket& bucket) {
  return z >= bucket.center - bucket.half_width && z < bucket.center + bucket.half_width;
}

struct SweepEvent {
  double score = 0.0;
  bool tp = false;
  double similarity = 1.0;
  int image = 0;
  int pred = 0;
};

}  // namespace

GtStatus difficulty_filter(const ObjectLabel& label, Category target, Difficulty difficulty) {
  if (label.is_dontcare()) return GtStatus::Ignored;
  if (label.category != target) return GtStatus::Excluded;
  const int d = static_cast<int>(difficulty);
  const bool passes = label.box2d.height() >= kMinHeight[d] &&
                      label.occlusion <= kMaxOcclusion[d] &&
                      label.truncation <= kMaxTruncation[d];
  return passes ? GtStatus::Counted : GtStatus::Ignored;
}

double task_iou(Task task, const ObjectLabel& gt, const ObjectLabel& pred) {
  switch (task) {
    case Task::Detect2D:
    case Task::AOS:
      return iou_2d(gt.box2d, pred.box2d);
    case Task::BEV:
      return iou_bev(Box3D::from_label(gt), Box3D::from_label(pred));
    case Task::Detect3D:
      return iou_3d(Box3D::from_label(gt), Box3D::from_label(pred));
  }
  return 0.0;
}

MatchResult match_detections(std::span<const ObjectLabel> gts, std::span<const ObjectLabel> preds,
                             const IouFn& iou_fn, double threshold,
                             std::span<const GtStatus> gt_status) {
  MatchResult result;
  result.outcomes.assign(preds.size(), PredOutcome::FalsePositive);
  result.matched_gt.assign(preds.size(), -1);
  for (GtStatus s : gt_status) {
    if (s == GtStatus::Counted) ++result.counted_gts;
  }

  std::vector<int> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return score_of(preds[static_cast<std::size_t>(a)]) >
           score_of(preds[static_cast<std::size_t>(b)]);
  });

  std::vector<bool> claimed(gts.size(), false);
  for (int pi : order) {
    const ObjectLabel& pred = preds[static_cast<std::size_t>(pi)];
    int best_gt = -1;
    double best_iou = -1.0;
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
      if (gt_status[gi] != GtStatus::Counted || claimed[gi]) continue;
      const double iou = iou_fn(gts[gi], pred);
      if (iou >= threshold && iou > best_iou) {
        best_iou = iou;
        best_gt = static_cast<int>(gi);
      }
    }
    if (best_gt >= 0) {
      claimed[static_cast<std::size_t>(best_gt)] = true;
      result.outcomes[static_cast<std::size_t>(pi)] = PredOutcome::TruePositive;
      result.matched_gt[static_cast<std::size_t>(pi)] = best_gt;
      result.pairs.push_back({0, best_gt, pi, best_iou});
      continue;
    }
    // A prediction stuck on an ignored box or a DontCare region must not be
    // punished as a false positive.
    bool shielded = false;
    for (std::size_t gi = 0; gi < gts.size() && !shielded; ++gi) {
      if (gt_status[gi] != GtStatus::Ignored) continue;
      const double overlap = gts[gi].is_dontcare()
                                 ? overlap_over_first(pred.box2d, gts[gi].box2d)
                                 : iou_fn(gts[gi], pred);
      shielded = overlap >= threshold;
    }
    if (shielded) result.outcomes[static_cast<std::size_t>(pi)] = PredOutcome::IgnoredOverlap;
  }
  return result;
}

namespace {

EvalResult evaluate_impl(std::span<const ImageFrame> frames, const EvalConfig& config,
                         bool orientation_weighted) {
  const Task iou_task = orientation_weighted ? Task::AOS : config.task;
  EvalResult result;
  std::vector<SweepEvent> events;
  int n_gt = 0;

  for (std::size_t img = 0; img < frames.size(); ++img) {
    const ImageFrame& frame = frames[img];

    std::vector<GtStatus> status(frame.gts.size());
    for (std::size_t gi = 0; gi < frame.gts.size(); ++gi) {
      const ObjectLabel& gt = frame.gts[gi];
      GtStatus base = difficulty_filter(gt, config.category, config.difficulty);
      if (config.depth_bucket && !gt.is_dontcare() && !in_bucket(gt.z, *config.depth_bucket)) {
        if (config.range_order == RangeFilterOrder::DifficultyThenBucket) {
          if (base == GtStatus::Counted) base = GtStatus::Ignored;
        } else {
          base = GtStatus::Excluded;
        }
      }
      status[gi] = base;
      if (status[gi] == GtStatus::Counted) ++n_gt;
      if (status[gi] == GtStatus::Ignored) ++result.counts.num_ignored;
    }

    std::vector<ObjectLabel> preds;
    std::vector<int> pred_orig;
    for (std::size_t pi = 0; pi < frame.preds.size(); ++pi) {
      const ObjectLabel& pred = frame.preds[pi];
      if (pred.category != config.category) continue;
      if (config.depth_bucket && !in_bucket(pred.z, *config.depth_bucket)) continue;
      preds.push_back(pred);
      pred_orig.push_back(static_cast<int>(pi));
    }
    result.counts.num_pred += static_cast<int>(preds.size());

    auto iou_fn = [&](const ObjectLabel& gt, const ObjectLabel& pred) {
      return task_iou(iou_task, gt, pred);
    };
    const MatchResult match =
        match_detections(frame.gts, preds, iou_fn, config.iou_threshold, status);

    for (std::size_t pi = 0; pi < preds.size(); ++pi) {
      SweepEvent ev;
      ev.score = score_of(preds[pi]);
      ev.image = static_cast<int>(img);
      ev.pred = pred_orig[pi];
      if (match.outcomes[pi] == PredOutcome::TruePositive) {
        ev.tp = true;
        if (orientation_weighted) {
          const ObjectLabel& gt = frame.gts[static_cast<std::size_t>(match.matched_gt[pi])];
          ev.similarity = 0.5 * (1.0 + std::cos(gt.alpha - preds[pi].alpha));
        }
        events.push_back(ev);
      } else if (match.outcomes[pi] == PredOutcome::FalsePositive) {
        ev.tp = false;
        events.push_back(ev);
      }
    }
    for (const MatchRecord& pair : match.pairs) {
      result.matched_pairs.push_back({static_cast<int>(img), pair.gt,
                                      pred_orig[static_cast<std::size_t>(pair.pred)], pair.iou});
    }
  }

  result.counts.num_gt = n_gt;
  if (n_gt == 0) {
    result.undefined = true;
    return result;
  }

  std::sort(events.begin(), events.end(), [](const SweepEvent& a, const SweepEvent& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.image != b.image) return a.image < b.image;
    return a.pred < b.pred;
  });

  // Operating points exist only at score boundaries: a cutoff keeps every
  // prediction of equal or higher score.
  struct Operating {
    double recall;
    double metric;
  };
  std::vector<Operating> ops;
  int tp = 0, fp = 0;
  double sim_sum = 0.0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].tp) {
      ++tp;
      sim_sum += events[i].similarity;
    } else {
      ++fp;
    }
    const bool boundary = i + 1 == events.size() || events[i + 1].score != events[i].score;
    if (boundary && tp > 0) {
      const double numer = orientation_weighted ? sim_sum : static_cast<double>(tp);
      ops.push_back({static_cast<double>(tp) / n_gt, numer / (tp + fp)});
    }
  }

  double sum = 0.0;
  for (int k = 0; k < 40; ++k) {
    const double target_recall = static_cast<double>(k + 1) / 40.0;
    double best = 0.0;
    for (const Operating& op : ops) {
      if (op.recall >= target_recall - 1e-12) best = std::max(best, op.metric);
    }
    result.precision_at_recall[static_cast<std::size_t>(k)] = best;
    sum += best;
  }
  result.ap40 = sum / 40.0 * 100.0;
  return result;
}

}  // namespace

EvalResult ap40(std::span<const ImageFrame> frames, const EvalConfig& config) {
  return evaluate_impl(frames, config, false);
}

EvalResult aos(std::span<const ImageFrame> frames, const EvalConfig& config) {
  return evaluate_impl(frames, config, true);
}

std::vector<std::pair<double, EvalResult>> rangewise_eval(std::span<const ImageFrame> frames,
                                                          const EvalConfig& config,
                                                          double interval) {
  if (!(interval > 0.0)) {
    throw InvalidArgument("range-wise interval must be positive");
  }
  std::vector<std::pair<double, EvalResult>> out;
  for (int k = 1;; ++k) {
    const double center = k * interval;
    if (center - 0.5 * interval > 90.0 + 1e-9) break;
    EvalConfig bucket_config = config;
    bucket_config.depth_bucket = DepthBucket{center, 0.5 * interval};
    out.emplace_back(center, config.task == Task::AOS ? aos(frames, bucket_config)
                                                      : ap40(frames, bucket_config));
  }
  return out;
}

}  // namespace mono3d
