#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "mono3d/evaluation.hpp"
#include "support/fixtures.hpp"

using namespace mono3d;

namespace {

std::vector<ImageFrame> synthetic_frames(int images, int objects) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> jitter(0.0, 0.6);
  std::uniform_real_distribution<double> score(0.05, 0.99);
  const Calibration calib = fixtures::make_calib();
  std::vector<ImageFrame> frames;
  for (int i = 0; i < images; ++i) {
    ImageFrame frame;
    for (int k = 0; k < objects; ++k) {
      const Box3D box{-10.0 + 3.0 * k, 1.6, 10.0 + 2.0 * k + (i % 7), 1.53, 1.63, 3.53,
                      0.15 * k};
      frame.gts.push_back(fixtures::make_car(box, calib));
      Box3D noisy = box;
      noisy.z += jitter(rng);
      noisy.x += 0.3 * jitter(rng);
      frame.preds.push_back(fixtures::make_car(noisy, calib, score(rng)));
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

void BM_Ap40_3d(benchmark::State& state) {
  const auto frames = synthetic_frames(static_cast<int>(state.range(0)), 12);
  EvalConfig config;
  config.task = Task::Detect3D;
  config.iou_threshold = 0.7;
  config.difficulty = Difficulty::Moderate;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ap40(frames, config));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Ap40_3d)->Arg(20)->Arg(100);

void BM_RangewiseEval(benchmark::State& state) {
  const auto frames = synthetic_frames(40, 12);
  EvalConfig config;
  config.task = Task::Detect3D;
  config.iou_threshold = 0.7;
  config.difficulty = Difficulty::Moderate;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rangewise_eval(frames, config, 10.0));
  }
}
BENCHMARK(BM_RangewiseEval);

}  // namespace
