// Serial reference vs OpenMP for each kernel, at sizes taken from a desk run
// (64x64 two-blob images) and larger ones where threading starts to pay.

#include <benchmark/benchmark.h>

#include <vector>

#include "promptaug/kernels.hpp"
#include "promptaug/rng.hpp"

namespace k = promptaug::kernels;
using promptaug::Image;
using promptaug::Point;
using promptaug::SplitMix64;

namespace {

std::vector<std::uint8_t> random_bytes(std::size_t n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<std::uint8_t> v(n);
  for (auto& b : v) b = static_cast<std::uint8_t>(rng.below(2));
  return v;
}

Image random_image(int side, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Image img(side, side, 1);
  for (auto& p : img.pixels()) p = static_cast<std::uint8_t>(rng.below(256));
  return img;
}

std::vector<Point> all_points(int side) {
  std::vector<Point> pts;
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x) pts.push_back({x, y});
  return pts;
}

template <bool Omp>
void BM_OverlapCounts(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0)) * state.range(0);
  const auto a = random_bytes(n, 1), b = random_bytes(n, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Omp ? k::omp::overlap_counts(a, b) : k::serial::overlap_counts(a, b));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <bool Omp>
void BM_PatchEntropies(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto img = random_image(side, 3);
  const auto pts = all_points(side);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Omp ? k::omp::patch_entropies(img, pts)
                                 : k::serial::patch_entropies(img, pts));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pts.size()));
}

template <bool Omp>
void BM_SquaredDistances(benchmark::State& state) {
  const auto pts = all_points(static_cast<int>(state.range(0)));
  const Point origin{3, 5};
  for (auto _ : state) {
    benchmark::DoNotOptimize(Omp ? k::omp::squared_distances(pts, origin)
                                 : k::serial::squared_distances(pts, origin));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pts.size()));
}

template <bool Omp>
void BM_GaussianBlur(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  SplitMix64 rng(4);
  std::vector<double> v(static_cast<std::size_t>(side) * side);
  for (auto& x : v) x = static_cast<double>(rng.below(1000)) / 1000.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(Omp ? k::omp::gaussian_blur(v, side, side, 2.5)
                                 : k::serial::gaussian_blur(v, side, side, 2.5));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(v.size()));
}

}  // namespace

BENCHMARK(BM_OverlapCounts<false>)->Name("overlap_counts/serial")->Arg(64)->Arg(512)->Arg(2048);
BENCHMARK(BM_OverlapCounts<true>)->Name("overlap_counts/omp")->Arg(64)->Arg(512)->Arg(2048);
BENCHMARK(BM_PatchEntropies<false>)->Name("patch_entropies/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_PatchEntropies<true>)->Name("patch_entropies/omp")->Arg(64)->Arg(256);
BENCHMARK(BM_SquaredDistances<false>)->Name("squared_distances/serial")->Arg(64)->Arg(1024);
BENCHMARK(BM_SquaredDistances<true>)->Name("squared_distances/omp")->Arg(64)->Arg(1024);
BENCHMARK(BM_GaussianBlur<false>)->Name("gaussian_blur/serial")->Arg(64)->Arg(512);
BENCHMARK(BM_GaussianBlur<true>)->Name("gaussian_blur/omp")->Arg(64)->Arg(512);

BENCHMARK_MAIN();
