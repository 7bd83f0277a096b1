#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

#include "mono3d/dataset.hpp"
#include "mono3d/evaluation.hpp"
#include "support/fixtures.hpp"

using namespace mono3d;

namespace {

struct CmdResult {
  int exit_code = -1;
  std::string output;
};

CmdResult run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + MONO3D_CLI_PATH + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CmdResult result;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof(buf), pipe)) {
    result.output.append(buf, n);
    if (n < sizeof(buf)) {
      if (std::feof(pipe)) break;
    }
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("eval produces a deterministic grid" * doctest::timeout(120)) {
  const fixtures::TempDir tmp("cli_eval");
  const auto scene = fixtures::make_diagnosis_scene(3, 2, /*with_raw=*/false);
  fixtures::write_scene_dirs(scene, tmp.path, /*with_raw=*/false);
  const std::string dirs = "--gt " + q(tmp.path / "label_2") + " --pred " + q(tmp.path / "pred") +
                           " --calib " + q(tmp.path / "calib");

  const auto first =
      run_cli("eval " + dirs + " --out " + q(tmp.path / "out1") + " --jobs 1");
  CHECK(first.exit_code == 0);
  const std::string csv1 = slurp(tmp.path / "out1" / "eval.csv");

  const auto second =
      run_cli("eval " + dirs + " --out " + q(tmp.path / "out2") + " --jobs 4");
  CHECK(second.exit_code == 0);
  CHECK(slurp(tmp.path / "out2" / "eval.csv") == csv1);

  const auto with_env = run_cli("eval " + dirs + " --out " + q(tmp.path / "out3"),
                                "MONO3D_DIAG_JOBS=3");
  CHECK(with_env.exit_code == 0);
  CHECK(slurp(tmp.path / "out3" / "eval.csv") == csv1);

  // 4 tasks x 3 difficulties x 1 threshold + header
  CHECK(csv1.find("task,category") == 0);
  int lines = 0;
  for (char c : csv1) lines += c == '\n';
  CHECK(lines == 13);

  // the CSV agrees with the library run on the same inputs
  Dataset ds = load_dataset({tmp.path / "label_2", tmp.path / "pred", tmp.path / "calib",
                             std::nullopt},
                            1);
  std::vector<ImageFrame> frames;
  for (const auto& rec : ds.images) frames.push_back({rec.gts, rec.preds});
  EvalConfig config;
  config.task = Task::Detect3D;
  config.category = Category::Car;
  config.iou_threshold = 0.7;
  config.difficulty = Difficulty::Moderate;
  char expected[64];
  std::snprintf(expected, sizeof(expected), "3d,Car,moderate,0.70,,%.4f", ap40(frames, config).ap40);
  CHECK(csv1.find(expected) != std::string::npos);
}

TEST_CASE("eval edge conditions" * doctest::timeout(120)) {
  const fixtures::TempDir tmp("cli_edge");
  const auto scene = fixtures::make_diagnosis_scene(2, 2, /*with_raw=*/false);
  fixtures::write_scene_dirs(scene, tmp.path, /*with_raw=*/false);
  std::filesystem::create_directories(tmp.path / "empty_pred");

  SUBCASE("empty prediction dir gives zero APs and exit 0") {
    const auto r = run_cli("eval --gt " + q(tmp.path / "label_2") + " --pred " +
                           q(tmp.path / "empty_pred") + " --calib " + q(tmp.path / "calib") +
                           " --out " + q(tmp.path / "out"));
    CHECK(r.exit_code == 0);
    const std::string csv = slurp(tmp.path / "out" / "eval.csv");
    CHECK(csv.find("3d,Car,moderate,0.70,,0.0000") != std::string::npos);
  }
  SUBCASE("missing calibration dir is a configuration error") {
    const auto r = run_cli("eval --gt " + q(tmp.path / "label_2") + " --pred " +
                           q(tmp.path / "pred") + " --calib " + q(tmp.path / "nope") + " --out " +
                           q(tmp.path / "out"));
    CHECK(r.exit_code == 1);
  }
  SUBCASE("one corrupt image keeps evaluating and exits 2") {
    fixtures::write_text(tmp.path / "label_2" / "000001.txt", "Car broken line\n");
    const auto r = run_cli("eval --gt " + q(tmp.path / "label_2") + " --pred " +
                           q(tmp.path / "pred") + " --calib " + q(tmp.path / "calib") + " --out " +
                           q(tmp.path / "out"));
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("000001") != std::string::npos);
    CHECK(std::filesystem::exists(tmp.path / "out" / "eval.csv"));
  }
  SUBCASE("missing required flag is a usage error") {
    const auto r = run_cli("eval --gt " + q(tmp.path / "label_2"));
    CHECK(r.exit_code == 1);
  }
  SUBCASE("config file provides flags and the command line wins") {
    const std::string config_path = (tmp.path / "run.toml").string();
    fixtures::write_text(tmp.path / "run.toml",
                         "[eval]\n"
                         "gt = \"" + (tmp.path / "label_2").string() + "\"\n" +
                         "pred = \"" + (tmp.path / "pred").string() + "\"\n" +
                         "calib = \"" + (tmp.path / "calib").string() + "\"\n" +
                         "out = \"" + (tmp.path / "out_cfg").string() + "\"\n" +
                         "format = \"csv\"\n");
    const auto r = run_cli("--config '" + config_path + "' eval");
    CHECK(r.exit_code == 0);
    CHECK(std::filesystem::exists(tmp.path / "out_cfg" / "eval.csv"));
    CHECK_FALSE(std::filesystem::exists(tmp.path / "out_cfg" / "eval.json"));

    const auto r2 = run_cli("--config '" + config_path + "' eval --format json --out " +
                            q(tmp.path / "out_cfg2"));
    CHECK(r2.exit_code == 0);
    CHECK(std::filesystem::exists(tmp.path / "out_cfg2" / "eval.json"));
    CHECK_FALSE(std::filesystem::exists(tmp.path / "out_cfg2" / "eval.csv"));
  }
}

TEST_CASE("range-eval emits bucket rows" * doctest::timeout(120)) {
  const fixtures::TempDir tmp("cli_range");
  const auto scene = fixtures::make_diagnosis_scene(2, 3, /*with_raw=*/false);
  fixtures::write_scene_dirs(scene, tmp.path, /*with_raw=*/false);
  const auto r = run_cli("range-eval --gt " + q(tmp.path / "label_2") + " --pred " +
                         q(tmp.path / "pred") + " --calib " + q(tmp.path / "calib") +
                         " --difficulty moderate --out " + q(tmp.path / "out") +
                         " --interval 10");
  CHECK(r.exit_code == 0);
  const std::string csv = slurp(tmp.path / "out" / "range_eval.csv");
  CHECK(csv.find(",20.0,") != std::string::npos);
  CHECK(csv.find(",90.0,") != std::string::npos);
}

TEST_CASE("diagnose" * doctest::timeout(120)) {
  const fixtures::TempDir tmp("cli_diag");

  SUBCASE("identity predictions give 100 everywhere, raw present, no degraded") {
    // predictions equal ground truths with a score column
    const Calibration calib = fixtures::make_calib();
    std::vector<DiagFrame> frames;
    for (int i = 0; i < 2; ++i) {
      DiagFrame frame;
      frame.calib = calib;
      for (int c = 0; c < 2; ++c) {
        const Box3D box{-4.0 + 6.0 * c, 1.6, 15.0 + 5.0 * i, 1.53, 1.63, 3.53, 0.2};
        frame.gts.push_back(fixtures::make_car(box, calib));
        frame.preds.push_back(fixtures::make_car(box, calib, 0.9));
      }
      frames.push_back(frame);
    }
    fixtures::DiagnosisScene scene{frames, 4};
    fixtures::write_scene_dirs(scene, tmp.path, /*with_raw=*/false);
    const auto r = run_cli("diagnose --gt " + q(tmp.path / "label_2") + " --pred " +
                           q(tmp.path / "pred") + " --calib " + q(tmp.path / "calib") +
                           " --out " + q(tmp.path / "out"));
    CHECK(r.exit_code == 0);
    const std::string csv = slurp(tmp.path / "out" / "diagnosis.csv");
    CHECK(csv.find("\"baseline\",100.0000") != std::string::npos);
    CHECK(csv.find("\"ground truth\",100.0000") != std::string::npos);
    CHECK(csv.find("\"w/o gt depth\",100.0000") != std::string::npos);
    // without the sidecar, depth substitution falls back to decoded centers
    CHECK(csv.find("\"w/ gt depth\",100.0000,1") != std::string::npos);
  }

  SUBCASE("noisy depth fixture improves under gt depth and flags nothing with raw") {
    const auto scene = fixtures::make_diagnosis_scene(4, 4, /*with_raw=*/true);
    fixtures::write_scene_dirs(scene, tmp.path, /*with_raw=*/true);
    const auto r = run_cli("diagnose --gt " + q(tmp.path / "label_2") + " --pred " +
                           q(tmp.path / "pred") + " --calib " + q(tmp.path / "calib") + " --raw " +
                           q(tmp.path / "raw") + " --out " + q(tmp.path / "out"));
    CHECK(r.exit_code == 0);
    const std::string csv = slurp(tmp.path / "out" / "diagnosis.csv");

    auto row_ap = [&](const std::string& label) {
      const auto pos = csv.find("\"" + label + "\",");
      REQUIRE(pos != std::string::npos);
      return std::stod(csv.substr(pos + label.size() + 3));
    };
    CHECK(row_ap("w/ gt depth") > row_ap("baseline"));
    CHECK(row_ap("ground truth") == 100.0);
    CHECK(csv.find(",1,") == std::string::npos);  // no degraded rows
  }
}

TEST_CASE("loc-error" * doctest::timeout(60)) {
  SUBCASE("single cell") {
    const auto r = run_cli("loc-error --shift 2,2 --depth 60 --focal 707.05");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("2,2,0.2400") != std::string::npos);
  }
  SUBCASE("zero shift row is all zeros") {
    const auto r = run_cli("loc-error --shift 0,0");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("0,0,0.0000,0.0000,0.0000,0.0000,0.0000") != std::string::npos);
  }
  SUBCASE("bad shift syntax is a configuration error") {
    CHECK(run_cli("loc-error --shift nope").exit_code == 1);
  }
  SUBCASE("negative depth is a configuration error") {
    CHECK(run_cli("loc-error --depth -5").exit_code == 1);
  }
}

TEST_CASE("stats" * doctest::timeout(120)) {
  const fixtures::TempDir tmp("cli_stats");
  const auto scene = fixtures::make_diagnosis_scene(3, 3, /*with_raw=*/false);
  fixtures::write_scene_dirs(scene, tmp.path, /*with_raw=*/false);

  const auto r = run_cli("stats --gt " + q(tmp.path / "label_2") + " --calib " +
                         q(tmp.path / "calib") + " --pred " + q(tmp.path / "pred") + " --out " +
                         q(tmp.path / "out") + " --category Car");
  CHECK(r.exit_code == 0);
  CHECK(std::filesystem::exists(tmp.path / "out" / "misalignment.csv"));
  CHECK(std::filesystem::exists(tmp.path / "out" / "misalignment.dat"));
  CHECK(std::filesystem::exists(tmp.path / "out" / "depth_error.csv"));
  const std::string csv = slurp(tmp.path / "out" / "misalignment.csv");
  CHECK(csv.find("bucket_center,count,mean_px,std_px") == 0);
  int lines = 0;
  for (char c : csv) lines += c == '\n';
  CHECK(lines >= 2);  // header plus at least one populated bucket
}

TEST_CASE("loss-check exit codes" * doctest::timeout(120)) {
  CHECK(run_cli("loss-check --trials 150 --seed 7").exit_code == 0);
  const auto corrupted = run_cli("loss-check --trials 60 --corrupt-gradient");
  CHECK(corrupted.exit_code == 3);
  CHECK(corrupted.output.find("failing case") != std::string::npos);
  CHECK(run_cli("loss-check --trials 0").exit_code == 1);
}

TEST_CASE("help and unknown commands") {
  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("frobnicate").exit_code == 1);
  CHECK(run_cli("").exit_code == 1);  // a subcommand is required
}

TEST_SUITE_END();
