#include <array>
#include <cmath>

#include "promptaug/kernels.hpp"

namespace promptaug::kernels {

double entropy_at(const Image& gray, Point p) {
  std::array<std::uint16_t, 256> hist{};
  int valid = 0;
  const int y0 = std::max(p.y - kEntropyPatchRadius, 0);
  const int y1 = std::min(p.y + kEntropyPatchRadius, gray.height() - 1);
  const int x0 = std::max(p.x - kEntropyPatchRadius, 0);
  const int x1 = std::min(p.x + kEntropyPatchRadius, gray.width() - 1);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      ++hist[gray.at(x, y)];
      ++valid;
    }
  }
  const double n = valid;
  double h = 0.0;
  for (std::uint16_t c : hist) {
    if (c == 0) continue;
    const double prob = c / n;
    h -= prob * std::log2(prob);
  }
  return h;
}

namespace detail {

std::vector<double> gaussian_taps(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    taps[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += taps[i + radius];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

int reflect101(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

}  // namespace detail

namespace serial {

OverlapCounts overlap_counts(std::span<const std::uint8_t> a,
                             std::span<const std::uint8_t> b) {
  OverlapCounts c;
  for (std::size_t i = 0; i < a.size(); ++i) {
    c.a += a[i];
    c.b += b[i];
    c.both += a[i] & b[i];
  }
  return c;
}

std::vector<double> patch_entropies(const Image& gray,
                                    std::span<const Point> points) {
  std::vector<double> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    out[i] = entropy_at(gray, points[i]);
  }
  return out;
}

std::vector<std::int64_t> squared_distances(std::span<const Point> points,
                                            Point origin) {
  std::vector<std::int64_t> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
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
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += taps[k + radius] *
               tmp[static_cast<std::size_t>(detail::reflect101(y + k, height)) *
                       width + x];
      }
      out[static_cast<std::size_t>(y) * width + x] = acc;
    }
  }
  return out;
}

}  // namespace serial
}  // namespace promptaug::kernels
