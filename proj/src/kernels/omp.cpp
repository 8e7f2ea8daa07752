#include <omp.h>

#include "promptaug/kernels.hpp"

namespace promptaug::kernels::omp {

OverlapCounts overlap_counts(std::span<const std::uint8_t> a,
                             std::span<const std::uint8_t> b) {
  std::uint64_t ca = 0, cb = 0, both = 0;
  const auto n = static_cast<std::int64_t>(a.size());
#pragma omp parallel for reduction(+ : ca, cb, both) schedule(static) if (n > 1 << 16)
  for (std::int64_t i = 0; i < n; ++i) {
    ca += a[i];
    cb += b[i];
    both += a[i] & b[i];
  }
  return {ca, cb, both};
}

std::vector<double> patch_entropies(const Image& gray,
                                    std::span<const Point> points) {
  std::vector<double> out(points.size());
  const auto n = static_cast<std::int64_t>(points.size());
#pragma omp parallel for schedule(static) if (n > 256)
  for (std::int64_t i = 0; i < n; ++i) {
    out[i] = entropy_at(gray, points[i]);
  }
  return out;
}

std::vector<std::int64_t> squared_distances(std::span<const Point> points,
                                            Point origin) {
  std::vector<std::int64_t> out(points.size());
  const auto n = static_cast<std::int64_t>(points.size());
#pragma omp parallel for schedule(static) if (n > 1 << 14)
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t dx = points[i].x - origin.x;
    const std::int64_t dy = points[i].y - origin.y;
    out[i] = dx * dx + dy * dy;
  }
  return out;
}

std::vector<double> gaussian_blur(std::span<const double> values, int width,
                                  int height, double sigma) {
  const auto taps = detail::gaussian_taps(sigma);
  const int radius = static_cast<int>(taps.size() / 2);
  std::vector<double> tmp(values.size());
  std::vector<double> out(values.size());
  // Tap order matches the serial version so sums round identically.
#pragma omp parallel
  {
#pragma omp for schedule(static)
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          acc += taps[k + radius] *
                 values[static_cast<std::size_t>(y) * width +
                        detail::reflect101(x + k, width)];
        }
        tmp[static_cast<std::size_t>(y) * width + x] = acc;
      }
    }
#pragma omp for schedule(static)
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          acc += taps[k + radius] *
                 tmp[static_cast<std::size_t>(
                         detail::reflect101(y + k, height)) * width + x];
        }
        out[static_cast<std::size_t>(y) * width + x] = acc;
      }
    }
  }
  return out;
}

}  // namespace promptaug::kernels::omp
