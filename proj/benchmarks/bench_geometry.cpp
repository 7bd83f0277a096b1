#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "mono3d/geometry.hpp"
#include "support/oracles.hpp"

using namespace mono3d;

namespace {

std::vector<std::pair<Box3D, Box3D>> box_pairs(int n) {
  std::mt19937_64 rng(1234);
  std::vector<std::pair<Box3D, Box3D>> pairs;
  pairs.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pairs.push_back(oracles::random_box_pair(rng));
  return pairs;
}

void BM_Iou2d(benchmark::State& state) {
  const Box2D a{100, 100, 220, 190};
  const Box2D b{130, 110, 260, 200};
  for (auto _ : state) {
    benchmark::DoNotOptimize(iou_2d(a, b));
  }
}
BENCHMARK(BM_Iou2d);

void BM_IouBev(benchmark::State& state) {
  const auto pairs = box_pairs(256);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& [a, b] = pairs[i++ & 255];
    benchmark::DoNotOptimize(iou_bev(a, b));
  }
}
BENCHMARK(BM_IouBev);

void BM_Iou3d(benchmark::State& state) {
  const auto pairs = box_pairs(256);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& [a, b] = pairs[i++ & 255];
    benchmark::DoNotOptimize(iou_3d(a, b));
  }
}
BENCHMARK(BM_Iou3d);

void BM_Iou3dOracle(benchmark::State& state) {
  const auto pairs = box_pairs(16);
  std::size_t i = 0;
  const int resolution = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const auto& [a, b] = pairs[i++ & 15];
    benchmark::DoNotOptimize(iou_3d_oracle(a, b, resolution));
  }
}
BENCHMARK(BM_Iou3dOracle)->Arg(32)->Arg(128);

void BM_Project(benchmark::State& state) {
  const Calibration calib({707.0493, 0, 604.0814, 45.75831, 0, 707.0493, 180.5066, -0.3454157,
                           0, 0, 1, 4.981016e-03});
  const Point3 p{1.4, 1.2, 28.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(project(p, calib));
  }
}
BENCHMARK(BM_Project);

}  // namespace
