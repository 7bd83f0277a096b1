#include "mono3d/report.hpp"

#include <cstdio>

#include "json.hpp"

#include "mono3d/diagnosis.hpp"

namespace mono3d {

namespace {

std::string fmt(double v, const char* spec = "%.4f") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

nlohmann::json eval_entry_json(const EvalGridEntry& e) {
  nlohmann::json row;
  row["task"] = std::string(to_string(e.task));
  row["category"] = std::string(to_string(e.category));
  row["difficulty"] = std::string(to_string(e.difficulty));
  row["iou_threshold"] = e.threshold;
  if (e.bucket_center) {
    row["bucket_center"] = *e.bucket_center;
  } else {
    row["bucket_center"] = nullptr;
  }
  row["ap40"] = e.result.ap40;
  row["num_gt"] = e.result.counts.num_gt;
  row["num_pred"] = e.result.counts.num_pred;
  row["num_ignored"] = e.result.counts.num_ignored;
  row["flag"] = e.result.undefined ? "undefined" : "ok";
  row["precision_at_recall"] = e.result.precision_at_recall;
  return row;
}

}  // namespace

std::string_view to_string(Task t) {
  switch (t) {
    case Task::Detect2D: return "2d";
    case Task::BEV: return "bev";
    case Task::Detect3D: return "3d";
    case Task::AOS: return "aos";
  }
  return "3d";
}

std::string_view to_string(Difficulty d) {
  switch (d) {
    case Difficulty::Easy: return "easy";
    case Difficulty::Moderate: return "moderate";
    case Difficulty::Hard: return "hard";
  }
  return "moderate";
}

std::string eval_report_csv(std::span<const EvalGridEntry> entries) {
  std::string out =
      "task,category,difficulty,iou_threshold,bucket_center,ap40,num_gt,num_pred,num_ignored,"
      "flag\n";
  for (const EvalGridEntry& e : entries) {
    out += std::string(to_string(e.task)) + ',';
    out += std::string(to_string(e.category)) + ',';
    out += std::string(to_string(e.difficulty)) + ',';
    out += fmt(e.threshold, "%.2f") + ',';
    out += e.bucket_center ? fmt(*e.bucket_center, "%.1f") : std::string();
    out += ',';
    out += fmt(e.result.ap40) + ',';
    out += std::to_string(e.result.counts.num_gt) + ',';
    out += std::to_string(e.result.counts.num_pred) + ',';
    out += std::to_string(e.result.counts.num_ignored) + ',';
    out += e.result.undefined ? "undefined" : "ok";
    out += '\n';
  }
  return out;
}

std::string eval_report_json(std::span<const EvalGridEntry> entries) {
  nlohmann::json doc;
  doc["metadata"] = {
      {"metric", "AP40"},
      {"recall_positions", 40},
      {"box_anchor", "bottom-center"},
      {"bucket_membership", "[center - half_width, center + half_width)"},
      {"rangewise_fn_handling",
       "out-of-bucket ground truths are ignored, not counted as false negatives"},
  };
  nlohmann::json rows = nlohmann::json::array();
  for (const EvalGridEntry& e : entries) rows.push_back(eval_entry_json(e));
  doc["results"] = std::move(rows);
  return doc.dump(2) + "\n";
}

std::string diagnosis_report_csv(const DiagnosisReport& report) {
  std::string out = "row,ap40,degraded,unmatched,flag\n";
  for (const DiagnosisRow& row : report.rows) {
    out += '"' + row.label + "\",";
    out += fmt(row.ap40) + ',';
    out += row.degraded ? "1," : "0,";
    out += std::to_string(row.unmatched) + ',';
    out += row.undefined ? "undefined" : "ok";
    out += '\n';
  }
  return out;
}

std::string diagnosis_report_json(const DiagnosisReport& report, CenterReference reference) {
  nlohmann::json doc;
  doc["metadata"] = {
      {"metric", "AP40"},
      {"matching", "2D IoU >= 0.5, greedy by score"},
      {"projection_reference",
       reference == CenterReference::Volumetric ? "volumetric-center" : "bottom-center"},
      {"unmatched_handling", "unsubstituted values are kept and counted per row"},
  };
  doc["baseline_ap"] = report.baseline_ap;
  doc["gt_ceiling_ap"] = report.gt_ceiling_ap;
  nlohmann::json rows = nlohmann::json::array();
  for (const DiagnosisRow& row : report.rows) {
    rows.push_back({
        {"row", row.label},
        {"ap40", row.ap40},
        {"degraded", row.degraded},
        {"unmatched", row.unmatched},
        {"flag", row.undefined ? "undefined" : "ok"},
    });
  }
  doc["rows"] = std::move(rows);
  return doc.dump(2) + "\n";
}

std::string loc_error_table_csv(std::span<const std::array<double, 2>> shifts,
                                std::span<const double> depths, double fu) {
  std::string out = "du,dv";
  for (double z : depths) out += ',' + fmt(z, "%.0f") + 'm';
  out += '\n';
  for (const auto& shift : shifts) {
    out += fmt(shift[0], "%.0f") + ',' + fmt(shift[1], "%.0f");
    for (double z : depths) {
      out += ',' + fmt(loc_error_from_shift(shift[0], shift[1], z, fu));
    }
    out += '\n';
  }
  return out;
}

std::string bucket_stats_csv(const BucketStatsResult& stats, std::string_view value_name) {
  std::string out = "bucket_center,count,mean_" + std::string(value_name) + ",std_" +
                    std::string(value_name) + "\n";
  for (const DepthBucketStats& b : stats.buckets) {
    out += fmt(b.bucket_center, "%.1f") + ',';
    out += std::to_string(b.count) + ',';
    out += fmt(b.mean_abs_error) + ',';
    out += fmt(b.std_dev) + '\n';
  }
  return out;
}

std::string bucket_stats_json(const BucketStatsResult& stats, std::string_view value_name) {
  nlohmann::json doc;
  doc["value"] = std::string(value_name);
  doc["skipped"] = stats.skipped;
  nlohmann::json rows = nlohmann::json::array();
  for (const DepthBucketStats& b : stats.buckets) {
    rows.push_back({
        {"bucket_center", b.bucket_center},
        {"count", b.count},
        {"mean_abs_error", b.mean_abs_error},
        {"std_dev", b.std_dev},
    });
  }
  doc["buckets"] = std::move(rows);
  return doc.dump(2) + "\n";
}

std::string bucket_stats_plot_data(const BucketStatsResult& stats, std::string_view value_name) {
  std::string out = "# depth_m mean_" + std::string(value_name) + " std_" +
                    std::string(value_name) + "\n";
  for (const DepthBucketStats& b : stats.buckets) {
    out += fmt(b.bucket_center, "%.1f") + ' ' + fmt(b.mean_abs_error) + ' ' + fmt(b.std_dev) +
           '\n';
  }
  return out;
}

}  // namespace mono3d
