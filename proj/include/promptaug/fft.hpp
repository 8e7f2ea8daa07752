#pragma once

#include <complex>
#include <span>
#include <vector>

namespace promptaug::fft {

// In-place iterative radix-2 FFT. Size must be a power of two. The inverse
// is scaled by 1/n.
void transform(std::span<std::complex<double>> data, bool inverse);

// Row-then-column 2-D transform of a row-major width x height grid; both
// dimensions must be powers of two.
void transform_2d(std::vector<std::complex<double>>& grid, int width,
                  int height, bool inverse);

}  // namespace promptaug::fft
