#pragma once

// Data-parallel inner loops. Each kernel has a serial reference in
// kernels::serial and an OpenMP version in kernels::omp with the same
// signature and bit-identical results; the tests compare the two and
// bench/ times them.

#include <cstdint>
#include <span>
#include <vector>

#include "promptaug/imgcore.hpp"

namespace promptaug::kernels {

inline constexpr int kEntropyPatchRadius = 4;  // 9x9 window

struct OverlapCounts {
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  std::uint64_t both = 0;
};

// Entropy (bits) of the intensity histogram in the window centered at p,
// clipped to the image. `gray` must be single-channel.
double entropy_at(const Image& gray, Point p);

namespace serial {

OverlapCounts overlap_counts(std::span<const std::uint8_t> a,
                             std::span<const std::uint8_t> b);
std::vector<double> patch_entropies(const Image& gray,
                                    std::span<const Point> points);
std::vector<std::int64_t> squared_distances(std::span<const Point> points,
                                            Point origin);
// Separable Gaussian with reflect-101 borders, kernel radius ceil(3 sigma).
std::vector<double> gaussian_blur(std::span<const double> values, int width,
                                  int height, double sigma);

}  // namespace serial

namespace omp {

OverlapCounts overlap_counts(std::span<const std::uint8_t> a,
                             std::span<const std::uint8_t> b);
std::vector<double> patch_entropies(const Image& gray,
                                    std::span<const Point> points);
std::vector<std::int64_t> squared_distances(std::span<const Point> points,
                                            Point origin);
std::vector<double> gaussian_blur(std::span<const double> values, int width,
                                  int height, double sigma);

}  // namespace omp

namespace detail {
std::vector<double> gaussian_taps(double sigma);
int reflect101(int i, int n);
}  // namespace detail

}  // namespace promptaug::kernels
