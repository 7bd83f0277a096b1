#include <string>

#include "doctest.h"

#include "mono3d/dataset.hpp"
#include "mono3d/errors.hpp"
#include "mono3d/kitti_io.hpp"
#include "mono3d/report.hpp"
#include "support/fixtures.hpp"

using namespace mono3d;

namespace {

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

}  // namespace

TEST_SUITE_BEGIN("report_dataset");

TEST_CASE("eval report rendering") {
  EvalGridEntry entry;
  entry.task = Task::Detect3D;
  entry.category = Category::Car;
  entry.difficulty = Difficulty::Moderate;
  entry.threshold = 0.7;
  entry.result.ap40 = 42.5;
  entry.result.counts = {10, 12, 3};

  EvalGridEntry bucketed = entry;
  bucketed.bucket_center = 20.0;
  bucketed.result.undefined = true;

  const std::vector<EvalGridEntry> entries{entry, bucketed};
  const std::string csv = eval_report_csv(entries);
  CHECK(count_lines(csv) == 3);
  CHECK(csv.find("3d,Car,moderate,0.70,,42.5000,10,12,3,ok") != std::string::npos);
  CHECK(csv.find("3d,Car,moderate,0.70,20.0,42.5000,10,12,3,undefined") != std::string::npos);

  const std::string json = eval_report_json(entries);
  CHECK(json.find("\"metadata\"") != std::string::npos);
  CHECK(json.find("\"bucket_membership\"") != std::string::npos);
  CHECK(json.find("\"undefined\"") != std::string::npos);
  CHECK(json.find("\"precision_at_recall\"") != std::string::npos);
}

TEST_CASE("diagnosis report rendering") {
  DiagnosisReport report;
  for (const std::string& label : diagnosis_row_labels()) {
    report.rows.push_back({label, 50.0, label == "w/ gt depth", 2, false});
  }
  report.baseline_ap = 50.0;
  report.gt_ceiling_ap = 50.0;

  const std::string csv = diagnosis_report_csv(report);
  CHECK(count_lines(csv) == 13);
  CHECK(csv.find("\"w/ gt depth\",50.0000,1,2,ok") != std::string::npos);
  CHECK(csv.find("\"w/o gt orientation\",50.0000,0,2,ok") != std::string::npos);

  const std::string json = diagnosis_report_json(report, CenterReference::Volumetric);
  CHECK(json.find("volumetric-center") != std::string::npos);
  CHECK(json.find("\"baseline_ap\"") != std::string::npos);
}

TEST_CASE("loc error table rendering") {
  const std::vector<std::array<double, 2>> shifts{{2, 2}, {0, 0}};
  const std::vector<double> depths{5, 60};
  const std::string csv = loc_error_table_csv(shifts, depths, 707.05);
  CHECK(csv.find("du,dv,5m,60m") == 0);
  CHECK(csv.find("2,2,0.0200,0.2400") != std::string::npos);
  CHECK(csv.find("0,0,0.0000,0.0000") != std::string::npos);
}

TEST_CASE("bucket stats rendering") {
  BucketStatsResult stats;
  stats.buckets.push_back({10.0, 4, 2.5, 0.5});
  stats.buckets.push_back({20.0, 1, 4.0, 0.0});
  stats.skipped = 2;

  const std::string csv = bucket_stats_csv(stats, "px");
  CHECK(csv.find("bucket_center,count,mean_px,std_px") == 0);
  CHECK(csv.find("10.0,4,2.5000,0.5000") != std::string::npos);

  const std::string json = bucket_stats_json(stats, "px");
  CHECK(json.find("\"skipped\": 2") != std::string::npos);

  const std::string dat = bucket_stats_plot_data(stats, "px");
  CHECK(dat.find("# depth_m mean_px std_px") == 0);
  CHECK(dat.find("20.0 4.0000 0.0000") != std::string::npos);
}

TEST_CASE("dataset loading") {
  const fixtures::TempDir tmp("dataset");
  const auto scene = fixtures::make_diagnosis_scene(3, 2, /*with_raw=*/true);
  fixtures::write_scene_dirs(scene, tmp.path, /*with_raw=*/true);

  DatasetPaths paths{tmp.path / "label_2", tmp.path / "pred", tmp.path / "calib",
                     tmp.path / "raw"};

  SUBCASE("stems load sorted with all parts") {
    const Dataset ds = load_dataset(paths, 1);
    CHECK(ds.failures.empty());
    REQUIRE(ds.images.size() == 3);
    CHECK(ds.images[0].stem == "000000");
    CHECK(ds.images[2].stem == "000002");
    for (const ImageRecord& rec : ds.images) {
      CHECK(rec.gts.size() == 2);
      CHECK(rec.preds.size() == 2);
      CHECK(rec.has_calib);
      CHECK(rec.raw.size() == 2);
    }
  }

  SUBCASE("parallel loading is equivalent") {
    const Dataset a = load_dataset(paths, 1);
    const Dataset b = load_dataset(paths, 4);
    REQUIRE(a.images.size() == b.images.size());
    for (std::size_t i = 0; i < a.images.size(); ++i) {
      CHECK(a.images[i].stem == b.images[i].stem);
      CHECK(a.images[i].gts == b.images[i].gts);
      CHECK(a.images[i].preds == b.images[i].preds);
    }
  }

  SUBCASE("missing prediction file means empty predictions") {
    std::filesystem::remove(tmp.path / "pred" / "000001.txt");
    const Dataset ds = load_dataset(paths, 1);
    CHECK(ds.failures.empty());
    CHECK(ds.images[1].preds.empty());
    CHECK(!ds.images[0].preds.empty());
  }

  SUBCASE("a corrupt file fails its image only and is reported") {
    fixtures::write_text(tmp.path / "label_2" / "000001.txt", "Car not-a-number\n");
    const Dataset ds = load_dataset(paths, 2);
    REQUIRE(ds.failures.size() == 1);
    CHECK(ds.failures[0].stem == "000001");
    REQUIRE(ds.images.size() == 2);
    CHECK(ds.images[0].stem == "000000");
    CHECK(ds.images[1].stem == "000002");
  }

  SUBCASE("missing or empty gt directory is an error") {
    DatasetPaths bad = paths;
    bad.gt_dir = tmp.path / "nope";
    CHECK_THROWS_AS(load_dataset(bad, 1), Error);
    std::filesystem::create_directories(tmp.path / "empty");
    bad.gt_dir = tmp.path / "empty";
    CHECK_THROWS_AS(load_dataset(bad, 1), Error);
  }
}

TEST_SUITE_END();
