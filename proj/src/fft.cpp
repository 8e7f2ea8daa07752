#include "promptaug/fft.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "promptaug/error.hpp"

namespace promptaug::fft {

void transform(std::span<std::complex<double>> data, bool inverse) {
  const std::size_t n = data.size();
  if (n == 0 || (n & (n - 1)) != 0) {
    throw Error(ErrorCode::kInvalidArgument, "fft size must be a power of two");
  }
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle =
        2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1 : -1);
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        // Twiddles computed directly rather than by recurrence to keep the
        // error flat across stages.
        const std::complex<double> w =
            std::polar(1.0, angle * static_cast<double>(k));
        const auto u = data[i + k];
        const auto v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
      }
    }
  }
  if (inverse) {
    for (auto& x : data) x /= static_cast<double>(n);
  }
}

void transform_2d(std::vector<std::complex<double>>& grid, int width,
                  int height, bool inverse) {
  for (int y = 0; y < height; ++y) {
    transform(std::span(grid).subspan(static_cast<std::size_t>(y) * width,
                                      width),
              inverse);
  }
  std::vector<std::complex<double>> column(height);
  for (int x = 0; x < width; ++x) {
    for (int y = 0; y < height; ++y) {
      column[y] = grid[static_cast<std::size_t>(y) * width + x];
    }
    transform(column, inverse);
    for (int y = 0; y < height; ++y) {
      grid[static_cast<std::size_t>(y) * width + x] = column[y];
    }
  }
}

}  // namespace promptaug::fft
