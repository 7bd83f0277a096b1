#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "mono3d/dataset.hpp"
#include "mono3d/diagnosis.hpp"
#include "mono3d/errors.hpp"
#include "mono3d/evaluation.hpp"
#include "mono3d/gradcheck.hpp"
#include "mono3d/report.hpp"

namespace fs = std::filesystem;
using namespace mono3d;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitPartial = 2;
constexpr int kExitProperty = 3;

int resolve_jobs(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("MONO3D_DIAG_JOBS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

// Indexed worker pool; results land in caller-owned slots, so the outcome
// does not depend on the worker count.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body) {
  const int workers = std::min<int>(jobs, static_cast<int>(count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

Category parse_category(const std::string& name) {
  auto c = category_from_string(name);
  if (!c) throw Error("unknown category '" + name + "'");
  return *c;
}

Task parse_task(const std::string& name) {
  if (name == "2d") return Task::Detect2D;
  if (name == "bev") return Task::BEV;
  if (name == "3d") return Task::Detect3D;
  if (name == "aos") return Task::AOS;
  throw Error("unknown task '" + name + "' (expected 2d, bev, 3d or aos)");
}

Difficulty parse_difficulty(const std::string& name) {
  if (name == "easy") return Difficulty::Easy;
  if (name == "moderate") return Difficulty::Moderate;
  if (name == "hard") return Difficulty::Hard;
  throw Error("unknown difficulty '" + name + "' (expected easy, moderate or hard)");
}

double default_threshold(Category c) { return c == Category::Car ? 0.7 : 0.5; }

void require_directory(const std::string& path, const char* what) {
  if (!fs::is_directory(path)) {
    throw Error(std::string(what) + " directory does not exist: " + path);
  }
}

void write_output(const std::string& out_dir, const std::string& name,
                  const std::string& content) {
  fs::create_directories(out_dir);
  const fs::path path = fs::path(out_dir) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
}

void print_failures(const std::vector<LoadFailure>& failures) {
  for (const LoadFailure& f : failures) {
    std::cerr << "warning: skipped image " << f.stem << ": " << f.message << " (" << f.path
              << ")\n";
  }
}

std::vector<DiagFrame> to_diag_frames(const Dataset& dataset, std::vector<LoadFailure>& failures) {
  std::vector<DiagFrame> frames;
  for (const ImageRecord& rec : dataset.images) {
    if (!rec.has_calib) {
      failures.push_back({rec.stem, rec.stem + ".txt", "no calibration file"});
      continue;
    }
    frames.push_back({rec.gts, rec.preds, rec.raw, rec.calib});
  }
  return frames;
}

// ----------------------------------------------------------------------------
// eval / range-eval

struct EvalArgs {
  std::string gt, pred, calib, raw, out;
  std::string format = "both";
  std::vector<std::string> tasks;
  std::vector<std::string> categories{"Car"};
  std::vector<std::string> difficulties{"easy", "moderate", "hard"};
  std::vector<double> thresholds;
  double interval = 10.0;
  int jobs = 0;
};

int cmd_eval(const EvalArgs& args, bool rangewise) {
  require_directory(args.gt, "ground-truth");
  require_directory(args.pred, "prediction");
  require_directory(args.calib, "calibration");

  DatasetPaths paths{args.gt, args.pred, args.calib,
                     args.raw.empty() ? std::nullopt : std::optional<fs::path>(args.raw)};
  const Dataset dataset = load_dataset(paths, resolve_jobs(args.jobs));
  std::vector<ImageFrame> frames;
  frames.reserve(dataset.images.size());
  for (const ImageRecord& rec : dataset.images) frames.push_back({rec.gts, rec.preds});

  std::vector<std::string> tasks = args.tasks;
  if (tasks.empty()) {
    tasks = rangewise ? std::vector<std::string>{"3d"}
                      : std::vector<std::string>{"2d", "bev", "3d", "aos"};
  }

  std::vector<EvalConfig> grid;
  for (const std::string& cat_name : args.categories) {
    const Category category = parse_category(cat_name);
    std::vector<double> thresholds = args.thresholds;
    if (thresholds.empty()) thresholds = {default_threshold(category)};
    for (const std::string& task_name : tasks) {
      const Task task = parse_task(task_name);
      for (const std::string& diff_name : args.difficulties) {
        const Difficulty difficulty = parse_difficulty(diff_name);
        for (double threshold : thresholds) {
          grid.push_back({task, category, threshold, difficulty, std::nullopt,
                          RangeFilterOrder::DifficultyThenBucket});
        }
      }
    }
  }

  std::vector<std::vector<EvalGridEntry>> cells(grid.size());
  parallel_for(grid.size(), resolve_jobs(args.jobs), [&](std::size_t i) {
    const EvalConfig& config = grid[i];
    if (rangewise) {
      for (auto& [center, result] : rangewise_eval(frames, config, args.interval)) {
        cells[i].push_back({config.task, config.category, config.difficulty,
                            config.iou_threshold, center, result});
      }
    } else {
      EvalResult result =
          config.task == Task::AOS ? aos(frames, config) : ap40(frames, config);
      cells[i].push_back({config.task, config.category, config.difficulty,
                          config.iou_threshold, std::nullopt, result});
    }
  });
  std::vector<EvalGridEntry> entries;
  for (auto& cell : cells) {
    entries.insert(entries.end(), cell.begin(), cell.end());
  }

  const std::string base = rangewise ? "range_eval" : "eval";
  if (args.format == "csv" || args.format == "both") {
    write_output(args.out, base + ".csv", eval_report_csv(entries));
  }
  if (args.format == "json" || args.format == "both") {
    write_output(args.out, base + ".json", eval_report_json(entries));
  }

  for (const EvalGridEntry& e : entries) {
    std::printf("%-4s %-12s %-8s thr=%.2f", std::string(to_string(e.task)).c_str(),
                std::string(to_string(e.category)).c_str(),
                std::string(to_string(e.difficulty)).c_str(), e.threshold);
    if (e.bucket_center) std::printf(" z=%5.1f", *e.bucket_center);
    std::printf("  ap40=%8.4f%s\n", e.result.ap40, e.result.undefined ? " (undefined)" : "");
  }

  print_failures(dataset.failures);
  return dataset.failures.empty() ? kExitOk : kExitPartial;
}

// ----------------------------------------------------------------------------
// diagnose

struct DiagnoseArgs {
  std::string gt, pred, calib, raw, out;
  std::string format = "both";
  std::string category = "Car";
  std::string difficulty = "moderate";
  double threshold = 0.0;  // 0 = per-category default
  int jobs = 0;
};

int cmd_diagnose(const DiagnoseArgs& args) {
  require_directory(args.gt, "ground-truth");
  require_directory(args.pred, "prediction");
  require_directory(args.calib, "calibration");

  DatasetPaths paths{args.gt, args.pred, args.calib,
                     args.raw.empty() ? std::nullopt : std::optional<fs::path>(args.raw)};
  const Dataset dataset = load_dataset(paths, resolve_jobs(args.jobs));
  std::vector<LoadFailure> failures = dataset.failures;
  const std::vector<DiagFrame> frames = to_diag_frames(dataset, failures);

  const Category category = parse_category(args.category);
  EvalConfig config;
  config.task = Task::Detect3D;
  config.category = category;
  config.difficulty = parse_difficulty(args.difficulty);
  config.iou_threshold = args.threshold > 0.0 ? args.threshold : default_threshold(category);

  const DiagnosisReport report = run_diagnosis_grid(frames, config);

  if (args.format == "csv" || args.format == "both") {
    write_output(args.out, "diagnosis.csv", diagnosis_report_csv(report));
  }
  if (args.format == "json" || args.format == "both") {
    write_output(args.out, "diagnosis.json",
                 diagnosis_report_json(report, CenterReference::Volumetric));
  }

  for (const DiagnosisRow& row : report.rows) {
    std::printf("%-22s ap40=%8.4f%s%s\n", row.label.c_str(), row.ap40,
                row.degraded ? " [degraded]" : "", row.undefined ? " (undefined)" : "");
  }

  print_failures(failures);
  return failures.empty() ? kExitOk : kExitPartial;
}

// ----------------------------------------------------------------------------
// loc-error

struct LocErrorArgs {
  double focal = 707.05;
  std::vector<std::string> shifts;
  std::vector<double> depths{5.0, 10.0, 20.0, 40.0, 60.0};
  std::string out;
};

int cmd_loc_error(const LocErrorArgs& args) {
  if (!(args.focal > 0.0)) throw Error("focal length must be positive");
  for (double z : args.depths) {
    if (!(z > 0.0)) throw Error("depths must be positive");
  }
  std::vector<std::array<double, 2>> shifts;
  if (args.shifts.empty()) {
    shifts = {{2, 2}, {4, 2}, {6, 2}, {6, 4}, {8, 2}, {8, 6}};
  } else {
    for (const std::string& s : args.shifts) {
      const auto comma = s.find(',');
      double du = 0.0, dv = 0.0;
      try {
        if (comma == std::string::npos) throw std::invalid_argument(s);
        du = std::stod(s.substr(0, comma));
        dv = std::stod(s.substr(comma + 1));
      } catch (const std::exception&) {
        throw Error("shift must look like 'du,dv', got '" + s + "'");
      }
      shifts.push_back({du, dv});
    }
  }
  const std::string csv = loc_error_table_csv(shifts, args.depths, args.focal);
  std::fputs(csv.c_str(), stdout);
  if (!args.out.empty()) write_output(args.out, "loc_error.csv", csv);
  return kExitOk;
}

// ----------------------------------------------------------------------------
// stats

struct StatsArgs {
  std::string gt, pred, calib, out;
  std::string format = "both";
  std::string category;
  double interval = 10.0;
  int jobs = 0;
};

int cmd_stats(const StatsArgs& args) {
  require_directory(args.gt, "ground-truth");
  require_directory(args.calib, "calibration");
  const bool with_preds = !args.pred.empty();
  if (with_preds) require_directory(args.pred, "prediction");

  DatasetPaths paths{args.gt, with_preds ? fs::path(args.pred) : fs::path(args.gt) / "__none__",
                     args.calib, std::nullopt};
  const Dataset dataset = load_dataset(paths, resolve_jobs(args.jobs));
  std::vector<LoadFailure> failures = dataset.failures;
  const std::vector<DiagFrame> frames = to_diag_frames(dataset, failures);

  MisalignmentOptions options;
  options.bucket_interval = args.interval;
  if (!args.category.empty()) options.category = parse_category(args.category);

  auto emit = [&](const std::string& base, const BucketStatsResult& stats,
                  std::string_view value_name) {
    if (args.format == "csv" || args.format == "both") {
      write_output(args.out, base + ".csv", bucket_stats_csv(stats, value_name));
    }
    if (args.format == "json" || args.format == "both") {
      write_output(args.out, base + ".json", bucket_stats_json(stats, value_name));
    }
    write_output(args.out, base + ".dat", bucket_stats_plot_data(stats, value_name));
  };

  const BucketStatsResult misalignment = misalignment_stats(frames, options);
  emit("misalignment", misalignment, "px");
  std::printf("misalignment: %zu buckets, %d objects skipped\n", misalignment.buckets.size(),
              misalignment.skipped);

  if (with_preds) {
    const BucketStatsResult depth_errors = depth_error_stats(frames, args.interval);
    emit("depth_error", depth_errors, "m");
    std::printf("depth error: %zu buckets, %d skipped\n", depth_errors.buckets.size(),
                depth_errors.skipped);
  }

  print_failures(failures);
  return failures.empty() ? kExitOk : kExitPartial;
}

// ----------------------------------------------------------------------------
// loss-check

struct LossCheckArgs {
  std::uint64_t seed = 1;
  int trials = 1000;
  double weight_center = 60.0;
  bool corrupt = false;
};

int cmd_loss_check(const LossCheckArgs& args) {
  LossCheckOptions options;
  options.seed = args.seed;
  options.trials = args.trials;
  options.weight_center = args.weight_center;
  options.corrupt_gradient = args.corrupt;

  const std::vector<PropertyResult> results = run_loss_check(options);
  bool all_passed = true;
  for (const PropertyResult& r : results) {
    std::printf("[%s] %-62s worst=%.3e tol=%.0e\n", r.passed ? " ok " : "FAIL", r.name.c_str(),
                r.worst_error, r.tolerance);
    if (!r.passed) {
      all_passed = false;
      std::printf("       failing case: %s\n", r.worst_case.c_str());
    }
  }
  std::printf("%s (seed=%llu, trials=%d)\n", all_passed ? "all properties passed" : "FAILURES",
              static_cast<unsigned long long>(args.seed), args.trials);
  return all_passed ? kExitOk : kExitProperty;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"KITTI-format monocular 3D detection metrics and diagnosis toolkit"};
  app.set_config("--config", "", "TOML config file mirrored by the flags (flags win)");
  app.require_subcommand(1);

  EvalArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand("eval", "AP40/AOS grid over KITTI-format files");
  EvalArgs range_args;
  CLI::App* range_cmd = app.add_subcommand("range-eval", "Range-wise AP40 curves");
  for (auto [cmd, args] : {std::pair{eval_cmd, &eval_args}, std::pair{range_cmd, &range_args}}) {
    cmd->add_option("--gt", args->gt, "Ground-truth label directory")->required();
    cmd->add_option("--pred", args->pred, "Prediction label directory")->required();
    cmd->add_option("--calib", args->calib, "Calibration directory")->required();
    cmd->add_option("--raw", args->raw, "Raw-outputs sidecar directory");
    cmd->add_option("--out", args->out, "Report output directory")->required();
    cmd->add_option("--format", args->format, "Report format: csv, json or both")
        ->check(CLI::IsMember({"csv", "json", "both"}));
    cmd->add_option("--task", args->tasks, "Tasks: 2d, bev, 3d, aos");
    cmd->add_option("--category", args->categories, "Categories to evaluate");
    cmd->add_option("--difficulty", args->difficulties, "Difficulties: easy, moderate, hard");
    cmd->add_option("--threshold", args->thresholds, "IoU thresholds");
    cmd->add_option("--jobs", args->jobs, "Worker threads (default: logical cores)");
  }
  range_cmd->add_option("--interval", range_args.interval, "Depth bucket interval, meters")
      ->check(CLI::PositiveNumber);

  DiagnoseArgs diag_args;
  CLI::App* diag_cmd =
      app.add_subcommand("diagnose", "Ground-truth substitution error analysis");
  diag_cmd->add_option("--gt", diag_args.gt, "Ground-truth label directory")->required();
  diag_cmd->add_option("--pred", diag_args.pred, "Prediction label directory")->required();
  diag_cmd->add_option("--calib", diag_args.calib, "Calibration directory")->required();
  diag_cmd->add_option("--raw", diag_args.raw, "Raw-outputs sidecar directory");
  diag_cmd->add_option("--out", diag_args.out, "Report output directory")->required();
  diag_cmd->add_option("--format", diag_args.format, "Report format: csv, json or both")
      ->check(CLI::IsMember({"csv", "json", "both"}));
  diag_cmd->add_option("--category", diag_args.category, "Category to diagnose");
  diag_cmd->add_option("--difficulty", diag_args.difficulty, "Difficulty setting");
  diag_cmd->add_option("--threshold", diag_args.threshold, "IoU threshold (0 = default)");
  diag_cmd->add_option("--jobs", diag_args.jobs, "Worker threads");

  LocErrorArgs loc_args;
  CLI::App* loc_cmd = app.add_subcommand(
      "loc-error", "Localization error induced by image-plane center shifts");
  loc_cmd->add_option("--focal", loc_args.focal, "Focal length fu, pixels");
  loc_cmd->add_option("--shift", loc_args.shifts, "Pixel shift 'du,dv' (repeatable)");
  loc_cmd->add_option("--depth", loc_args.depths, "Depths in meters (repeatable)");
  loc_cmd->add_option("--out", loc_args.out, "Also write loc_error.csv here");

  StatsArgs stats_args;
  CLI::App* stats_cmd =
      app.add_subcommand("stats", "Center misalignment and depth-error statistics");
  stats_cmd->add_option("--gt", stats_args.gt, "Ground-truth label directory")->required();
  stats_cmd->add_option("--pred", stats_args.pred, "Prediction directory (enables depth errors)");
  stats_cmd->add_option("--calib", stats_args.calib, "Calibration directory")->required();
  stats_cmd->add_option("--out", stats_args.out, "Report output directory")->required();
  stats_cmd->add_option("--format", stats_args.format, "Report format: csv, json or both")
      ->check(CLI::IsMember({"csv", "json", "both"}));
  stats_cmd->add_option("--category", stats_args.category, "Restrict to one category");
  stats_cmd->add_option("--interval", stats_args.interval, "Depth bucket interval, meters")
      ->check(CLI::PositiveNumber);
  stats_cmd->add_option("--jobs", stats_args.jobs, "Worker threads");

  LossCheckArgs loss_args;
  CLI::App* loss_cmd =
      app.add_subcommand("loss-check", "Finite-difference and identity property suite");
  loss_cmd->add_option("--seed", loss_args.seed, "RNG seed");
  loss_cmd->add_option("--trials", loss_args.trials, "Samples per property")
      ->check(CLI::PositiveNumber);
  loss_cmd->add_option("--weight-center", loss_args.weight_center,
                       "Center of the soft/hard weight step, meters");
  loss_cmd->add_flag("--corrupt-gradient", loss_args.corrupt)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (app.got_subcommand(eval_cmd)) return cmd_eval(eval_args, false);
    if (app.got_subcommand(range_cmd)) return cmd_eval(range_args, true);
    if (app.got_subcommand(diag_cmd)) return cmd_diagnose(diag_args);
    if (app.got_subcommand(loc_cmd)) return cmd_loc_error(loc_args);
    if (app.got_subcommand(stats_cmd)) return cmd_stats(stats_args);
    if (app.got_subcommand(loss_cmd)) return cmd_loss_check(loss_args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
