#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "promptaug/imgcore.hpp"
#include "promptaug/sampling.hpp"

namespace promptaug {

inline constexpr int kDefaultCropMargin = 10;

struct CropRegion {
  Box box;      // full-image coordinates
  Image image;  // box.width() x box.height()
};

// Row-major saliency scores in [0, 1]; the maximum is 1 unless all zero.
struct SaliencyMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  double at(int x, int y) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
};

/// Tight bbox of the mask grown by `margin` on every side, clamped to the
/// image, and the corresponding sub-image.
CropRegion crop_with_margin(const Image& img, const BinaryMask& initial_mask,
                            int margin = kDefaultCropMargin);

// Min-max rescale to [0,1]; a flat (or non-finite) input becomes all zeros.
SaliencyMap normalize_saliency(int width, int height,
                               std::vector<double> values);

// Spectral residual saliency (Hou & Zhang 2007) at a 64x64 working size.
SaliencyMap spectral_residual_saliency(const Image& img);

// Histogram bin (0..255) used for Otsu on map values.
int saliency_bin(double value);
// Otsu threshold over the 256-bin histogram; foreground is bin > threshold.
int otsu_threshold(const SaliencyMap& map);
/// Otsu binarization with a top-1% fallback (strictly positive values only).
BinaryMask binarize_saliency(const SaliencyMap& map);

// Bilinear resize with pixel-center alignment.
std::vector<double> resize_bilinear(const std::vector<double>& src, int src_w,
                                    int src_h, int dst_w, int dst_h);

class SaliencySource {
 public:
  virtual ~SaliencySource() = default;
  virtual SaliencyMap compute(const Image& img) = 0;
  virtual std::string name() const = 0;
};

class SpectralResidualSource final : public SaliencySource {
 public:
  SaliencyMap compute(const Image& img) override {
    return spectral_residual_saliency(img);
  }
  std::string name() const override { return "spectral_residual"; }
};

/// Salient pixels of the cropped region, mapped back to full-image
/// coordinates, minus `exclude`. Throws SaliencyEmpty when nothing survives.
CandidateSet saliency_candidates(const Image& img,
                                 const BinaryMask& initial_mask,
                                 SaliencySource& source,
                                 std::optional<Point> exclude = std::nullopt,
                                 int margin = kDefaultCropMargin);

/// Uniform seeded draw from the saliency region. The point may fall outside
/// the initial mask.
Point sample_saliency_point(const Image& img, const BinaryMask& initial_mask,
                            std::uint64_t seed, SaliencySource& source,
                            std::optional<Point> exclude = std::nullopt,
                            int margin = kDefaultCropMargin);

}  // namespace promptaug
