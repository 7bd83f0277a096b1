#include "mono3d/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

#include "mono3d/errors.hpp"
#include "mono3d/kitti_io.hpp"

namespace mono3d {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

Dataset load_dataset(const DatasetPaths& paths, int jobs) {
  if (!fs::is_directory(paths.gt_dir)) {
    throw Error("ground-truth directory does not exist: " + paths.gt_dir.string());
  }

  std::vector<std::string> stems;
  for (const auto& entry : fs::directory_iterator(paths.gt_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      stems.push_back(entry.path().stem().string());
    }
  }
  if (stems.empty()) {
    throw Error("no .txt label files in " + paths.gt_dir.string());
  }
  std::sort(stems.begin(), stems.end());

  std::vector<std::optional<ImageRecord>> records(stems.size());
  std::vector<std::optional<LoadFailure>> failures(stems.size());

  auto load_one = [&](std::size_t i) {
    const std::string& stem = stems[i];
    ImageRecord rec;
    rec.stem = stem;
    std::string current;
    try {
      current = (paths.gt_dir / (stem + ".txt")).string();
      rec.gts = parse_label_file(read_file(current));

      const fs::path pred_file = paths.pred_dir / (stem + ".txt");
      if (fs::exists(pred_file)) {
        current = pred_file.string();
        rec.preds = parse_label_file(read_file(pred_file));
      }
      const fs::path calib_file = paths.calib_dir / (stem + ".txt");
      if (fs::exists(calib_file)) {
        current = calib_file.string();
        rec.calib = parse_calib_file(read_file(calib_file));
        rec.has_calib = true;
      }
      if (paths.raw_dir) {
        const fs::path raw_file = *paths.raw_dir / (stem + ".json");
        if (fs::exists(raw_file)) {
          current = raw_file.string();
          rec.raw = parse_raw_outputs(read_file(raw_file));
        }
      }
      records[i] = std::move(rec);
    } catch (const Error& e) {
      failures[i] = LoadFailure{stem, current, e.what()};
    }
  };

  int workers = jobs;
  if (workers <= 0) {
    const unsigned hc = std::thread::hardware_concurrency();
    workers = hc > 0 ? static_cast<int>(hc) : 1;
  }
  workers = std::min<int>(workers, static_cast<int>(stems.size()));

  if (workers <= 1) {
    for (std::size_t i = 0; i < stems.size(); ++i) load_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < stems.size(); i = next.fetch_add(1)) {
          load_one(i);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }

  Dataset dataset;
  for (std::size_t i = 0; i < stems.size(); ++i) {
    if (records[i]) {
      dataset.images.push_back(std::move(*records[i]));
    } else if (failures[i]) {
      dataset.failures.push_back(std::move(*failures[i]));
    }
  }
  return dataset;
}

}  // namespace mono3d
