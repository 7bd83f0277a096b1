#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mono3d/types.hpp"

namespace mono3d {

/// All files of one image stem. Missing prediction/calibration/raw files are
/// tolerated (empty predictions, has_calib = false); parse failures are not.
struct ImageRecord {
  std::string stem;
  std::vector<ObjectLabel> gts;
  std::vector<ObjectLabel> preds;
  Calibration calib;
  bool has_calib = false;
  std::vector<RawHeadOutputs> raw;
};

struct LoadFailure {
  std::string stem;
  std::string path;
  std::string message;
};

struct DatasetPaths {
  std::filesystem::path gt_dir;
  std::filesystem::path pred_dir;
  std::filesystem::path calib_dir;
  std::optional<std::filesystem::path> raw_dir;
};

struct Dataset {
  std::vector<ImageRecord> images;     // stem-sorted
  std::vector<LoadFailure> failures;   // parse errors; matching image dropped
};

std::string read_file(const std::filesystem::path& path);

/// Associates per-image files by filename stem (any stem accepted), parsing
/// them with `jobs` worker threads. The image set is defined by the *.txt
/// files in gt_dir. Throws Error when gt_dir is missing or holds no labels.
Dataset load_dataset(const DatasetPaths& paths, int jobs = 1);

}  // namespace mono3d
