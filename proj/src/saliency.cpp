#include "promptaug/saliency.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>

#include "promptaug/fft.hpp"
#include "promptaug/kernels.hpp"

namespace promptaug {

namespace {

constexpr int kWorkingSize = 64;
constexpr double kBlurSigma = 2.5;
constexpr double kAmplitudeFloor = 1e-12;
// Amplitudes below this fraction of the peak are clamped before the log.
// Bilinear resampling leaves near-zeros in the spectrum whose log would
// otherwise dominate the residual.
constexpr double kRelativeAmplitudeFloor = 1e-4;

}  // namespace

CropRegion crop_with_margin(const Image& img, const BinaryMask& initial_mask,
                            int margin) {
  if (img.width() != initial_mask.width() ||
      img.height() != initial_mask.height()) {
    throw Error(ErrorCode::kDimensionMismatch, "crop: mask/image mismatch");
  }
  const auto bbox = tight_bbox(initial_mask);
  if (!bbox) throw Error(ErrorCode::kEmptyMask, "crop: initial mask is empty");
  Box box{std::max(bbox->x_min - margin, 0), std::max(bbox->y_min - margin, 0),
          std::min(bbox->x_max + margin, img.width() - 1),
          std::min(bbox->y_max + margin, img.height() - 1)};
  return {box, crop(img, box)};
}

SaliencyMap normalize_saliency(int width, int height,
                               std::vector<double> values) {
  SaliencyMap map{width, height, std::move(values)};
  if (map.values.empty()) return map;
  const auto [lo, hi] = std::minmax_element(map.values.begin(), map.values.end());
  const double min = *lo;
  const double range = *hi - *lo;
  bool finite = std::isfinite(range);
  for (double v : map.values) finite = finite && std::isfinite(v);
  if (!finite || range <= 0.0) {
    std::fill(map.values.begin(), map.values.end(), 0.0);
    return map;
  }
  for (double& v : map.values) v = std::clamp((v - min) / range, 0.0, 1.0);
  return map;
}

std::vector<double> resize_bilinear(const std::vector<double>& src, int src_w,
                                    int src_h, int dst_w, int dst_h) {
  std::vector<double> dst(static_cast<std::size_t>(dst_w) * dst_h);
  const double sx = static_cast<double>(src_w) / dst_w;
  const double sy = static_cast<double>(src_h) / dst_h;
  for (int y = 0; y < dst_h; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, src_h - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, src_h - 1);
    const double wy = fy - y0;
    for (int x = 0; x < dst_w; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, src_w - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, src_w - 1);
      const double wx = fx - x0;
      auto at = [&](int xx, int yy) {
        return src[static_cast<std::size_t>(yy) * src_w + xx];
      };
      const double top = at(x0, y0) * (1 - wx) + at(x1, y0) * wx;
      const double bottom = at(x0, y1) * (1 - wx) + at(x1, y1) * wx;
      dst[static_cast<std::size_t>(y) * dst_w + x] = top * (1 - wy) + bottom * wy;
    }
  }
  return dst;
}

SaliencyMap spectral_residual_saliency(const Image& img) {
  const Image gray = to_grayscale(img);
  const auto px = gray.pixels();
  const auto [lo, hi] = std::minmax_element(px.begin(), px.end());
  if (*lo == *hi) {
    return {gray.width(), gray.height(),
            std::vector<double>(px.size(), 0.0)};
  }

  std::vector<double> intensity(px.begin(), px.end());
  const auto small = resize_bilinear(intensity, gray.width(), gray.height(),
                                     kWorkingSize, kWorkingSize);

  constexpr int n = kWorkingSize;
  std::vector<std::complex<double>> spectrum(small.begin(), small.end());
  fft::transform_2d(spectrum, n, n, false);

  std::vector<double> log_amp(spectrum.size());
  std::vector<double> phase(spectrum.size());
  double peak_amp = 0.0;
  for (const auto& c : spectrum) peak_amp = std::max(peak_amp, std::abs(c));
  const double floor = std::max(kAmplitudeFloor, kRelativeAmplitudeFloor * peak_amp);
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    log_amp[i] = std::log(std::max(std::abs(spectrum[i]), floor));
    phase[i] = std::arg(spectrum[i]);
  }

  // Residual = log amplitude minus its 3x3 mean; the spectrum is periodic so
  // the window wraps.
  for (int v = 0; v < n; ++v) {
    for (int u = 0; u < n; ++u) {
      double mean = 0.0;
      for (int dv = -1; dv <= 1; ++dv) {
        for (int du = -1; du <= 1; ++du) {
          mean += log_amp[static_cast<std::size_t>((v + dv + n) % n) * n +
                          (u + du + n) % n];
        }
      }
      mean /= 9.0;
      const std::size_t i = static_cast<std::size_t>(v) * n + u;
      spectrum[i] = std::polar(std::exp(log_amp[i] - mean), phase[i]);
    }
  }
  fft::transform_2d(spectrum, n, n, true);

  std::vector<double> energy(spectrum.size());
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    energy[i] = std::norm(spectrum[i]);
  }
  const auto blurred = kernels::omp::gaussian_blur(energy, n, n, kBlurSigma);
  auto full = resize_bilinear(blurred, n, n, gray.width(), gray.height());
  return normalize_saliency(gray.width(), gray.height(), std::move(full));
}

int saliency_bin(double value) {
  return std::clamp(static_cast<int>(value * 256.0), 0, 255);
}

int otsu_threshold(const SaliencyMap& map) {
  std::array<double, 256> hist{};
  for (double v : map.values) hist[saliency_bin(v)] += 1.0;
  const double total = static_cast<double>(map.values.size());
  double sum_all = 0.0;
  for (int i = 0; i < 256; ++i) sum_all += i * hist[i];

  int best = 0;
  double best_var = -1.0;
  double w0 = 0.0;
  double sum0 = 0.0;
  for (int t = 0; t < 256; ++t) {
    w0 += hist[t];
    sum0 += t * hist[t];
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double m0 = sum0 / w0;
    const double m1 = (sum_all - sum0) / w1;
    const double var = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (var > best_var) {
      best_var = var;
      best = t;
    }
  }
  return best;
}

BinaryMask binarize_saliency(const SaliencyMap& map) {
  BinaryMask mask(map.width, map.height);
  const int threshold = otsu_threshold(map);
  bool any = false;
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      if (saliency_bin(map.at(x, y)) > threshold) {
        mask.set(x, y);
        any = true;
      }
    }
  }
  if (any) return mask;

  // Fallback: the top 1% of values, never including zeros.
  std::vector<double> sorted = map.values;
  const std::size_t keep =
      std::max<std::size_t>(1, (sorted.size() + 99) / 100);
  std::nth_element(sorted.begin(), sorted.begin() + (keep - 1), sorted.end(),
                   std::greater<>());
  const double cutoff = sorted[keep - 1];
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      const double v = map.at(x, y);
      if (v >= cutoff && v > 0.0) mask.set(x, y);
    }
  }
  return mask;
}

CandidateSet saliency_candidates(const Image& img,
                                 const BinaryMask& initial_mask,
                                 SaliencySource& source,
                                 std::optional<Point> exclude, int margin) {
  const CropRegion region = crop_with_margin(img, initial_mask, margin);
  const SaliencyMap map = source.compute(region.image);
  if (map.width != region.image.width() || map.height != region.image.height()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "saliency map size differs from the crop");
  }
  const BinaryMask salient = binarize_saliency(map);
  std::vector<Point> points;
  for (Point p : foreground_points(salient)) {
    points.push_back({p.x + region.box.x_min, p.y + region.box.y_min});
  }
  auto c = candidates_from_points(img.width(), img.height(), std::move(points),
                                  exclude);
  if (c.empty()) {
    throw Error(ErrorCode::kSaliencyEmpty, "saliency mask is empty");
  }
  return c;
}

Point sample_saliency_point(const Image& img, const BinaryMask& initial_mask,
                            std::uint64_t seed, SaliencySource& source,
                            std::optional<Point> exclude, int margin) {
  const auto c = saliency_candidates(img, initial_mask, source, exclude, margin);
  return sample_random(c, seed);
}

}  // namespace promptaug
