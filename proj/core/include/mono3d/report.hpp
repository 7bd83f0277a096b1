#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mono3d/diagnosis.hpp"
#include "mono3d/evaluation.hpp"

namespace mono3d {

/// One cell of the (task x difficulty x threshold x bucket) metric grid.
struct EvalGridEntry {
  Task task = Task::Detect3D;
  Category category = Category::Car;
  Difficulty difficulty = Difficulty::Moderate;
  double threshold = 0.7;
  std::optional<double> bucket_center;  // set for range-wise rows
  EvalResult result;
};

std::string_view to_string(Task t);
std::string_view to_string(Difficulty d);

/// CSV with one row per grid entry:
/// task,category,difficulty,iou_threshold,bucket_center,ap40,num_gt,num_pred,num_ignored,flag
std::string eval_report_csv(std::span<const EvalGridEntry> entries);

/// JSON mirror of the CSV plus a metadata object recording the bucket
/// boundary convention and the range-wise FN handling.
std::string eval_report_json(std::span<const EvalGridEntry> entries);

std::string diagnosis_report_csv(const DiagnosisReport& report);
std::string diagnosis_report_json(const DiagnosisReport& report, CenterReference reference);

/// Localization-error grid: one row per (du, dv) shift, one column per depth.
std::string loc_error_table_csv(std::span<const std::array<double, 2>> shifts,
                                std::span<const double> depths, double fu);

std::string bucket_stats_csv(const BucketStatsResult& stats, std::string_view value_name);
std::string bucket_stats_json(const BucketStatsResult& stats, std::string_view value_name);

/// Plot-data series: "center mean std" per line, '#'-prefixed header.
std::string bucket_stats_plot_data(const BucketStatsResult& stats, std::string_view value_name);

}  // namespace mono3d
