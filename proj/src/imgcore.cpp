#include "promptaug/imgcore.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "promptaug/kernels.hpp"

namespace promptaug {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kRleCountMismatch: return "RleCountMismatch";
    case ErrorCode::kEmptyMask: return "EmptyMask";
    case ErrorCode::kEmptyCandidates: return "EmptyCandidates";
    case ErrorCode::kInsufficientCandidates: return "InsufficientCandidates";
    case ErrorCode::kSaliencyEmpty: return "SaliencyEmpty";
    case ErrorCode::kInvalidPrompt: return "InvalidPrompt";
    case ErrorCode::kProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::kSegmenterUnavailable: return "SegmenterUnavailable";
    case ErrorCode::kAdapterError: return "AdapterError";
    case ErrorCode::kProtocolError: return "ProtocolError";
    case ErrorCode::kSpawnFailed: return "SpawnFailed";
    case ErrorCode::kHandshakeTimeout: return "HandshakeTimeout";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kParseError: return "ParseError";
  }
  return "Unknown";
}

namespace {

void check_dims(int width, int height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "image dimensions must be positive, got " +
                    std::to_string(width) + "x" + std::to_string(height));
  }
}

}  // namespace

Image::Image(int width, int height, int channels)
    : width_(width), height_(height), channels_(channels) {
  check_dims(width, height);
  if (channels != 1 && channels != 3) {
    throw Error(ErrorCode::kInvalidArgument,
                "channels must be 1 or 3, got " + std::to_string(channels));
  }
  pixels_.assign(static_cast<std::size_t>(width) * height * channels, 0);
}

Image::Image(int width, int height, int channels,
             std::vector<std::uint8_t> pixels)
    : Image(width, height, channels) {
  if (pixels.size() != pixels_.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "pixel buffer has " + std::to_string(pixels.size()) +
                    " bytes, expected " + std::to_string(pixels_.size()));
  }
  pixels_ = std::move(pixels);
}

BinaryMask::BinaryMask(int width, int height, bool fill)
    : width_(width), height_(height) {
  check_dims(width, height);
  bits_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> bits)
    : BinaryMask(width, height) {
  if (bits.size() != bits_.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "mask buffer has " + std::to_string(bits.size()) +
                    " entries, expected " + std::to_string(bits_.size()));
  }
  for (std::size_t i = 0; i < bits.size(); ++i) bits_[i] = bits[i] ? 1 : 0;
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(
      std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

bool BinaryMask::any() const {
  return std::find(bits_.begin(), bits_.end(), std::uint8_t{1}) != bits_.end();
}

BinaryMask& BinaryMask::operator|=(const BinaryMask& other) {
  if (!same_shape(other)) {
    throw Error(ErrorCode::kDimensionMismatch, "mask union: shape mismatch");
  }
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] |= other.bits_[i];
  return *this;
}

BinaryMask& BinaryMask::operator&=(const BinaryMask& other) {
  if (!same_shape(other)) {
    throw Error(ErrorCode::kDimensionMismatch,
                "mask intersection: shape mismatch");
  }
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] &= other.bits_[i];
  return *this;
}

double dice(const BinaryMask& a, const BinaryMask& b) {
  if (!a.same_shape(b)) {
    throw Error(ErrorCode::kDimensionMismatch,
                "dice: " + std::to_string(a.width()) + "x" +
                    std::to_string(a.height()) + " vs " +
                    std::to_string(b.width()) + "x" +
                    std::to_string(b.height()));
  }
  const auto counts = kernels::omp::overlap_counts(a.bits(), b.bits());
  const std::uint64_t denom = counts.a + counts.b;
  if (denom == 0) return 1.0;
  return 2.0 * static_cast<double>(counts.both) / static_cast<double>(denom);
}

RleMask rle_encode(const BinaryMask& mask) {
  RleMask rle{mask.width(), mask.height(), {}};
  std::uint8_t current = 0;
  std::uint32_t run = 0;
  for (int x = 0; x < mask.width(); ++x) {
    for (int y = 0; y < mask.height(); ++y) {
      const std::uint8_t v = mask.at(x, y) ? 1 : 0;
      if (v != current) {
        rle.counts.push_back(run);
        run = 0;
        current = v;
      }
      ++run;
    }
  }
  rle.counts.push_back(run);
  return rle;
}

BinaryMask rle_decode(const RleMask& rle) {
  const std::uint64_t total = std::accumulate(
      rle.counts.begin(), rle.counts.end(), std::uint64_t{0});
  const std::uint64_t expected =
      static_cast<std::uint64_t>(rle.width) * static_cast<std::uint64_t>(rle.height);
  if (rle.width < 1 || rle.height < 1 || total != expected) {
    throw Error(ErrorCode::kRleCountMismatch,
                "RLE counts sum to " + std::to_string(total) + ", expected " +
                    std::to_string(expected));
  }
  BinaryMask mask(rle.width, rle.height);
  std::uint64_t pos = 0;
  bool value = false;
  for (std::uint32_t run : rle.counts) {
    if (value) {
      for (std::uint64_t i = pos; i < pos + run; ++i) {
        // column-major index -> (x, y)
        mask.set(static_cast<int>(i / rle.height),
                 static_cast<int>(i % rle.height));
      }
    }
    pos += run;
    value = !value;
  }
  return mask;
}

std::optional<Box> tight_bbox(const BinaryMask& mask) {
  Box box{mask.width(), mask.height(), -1, -1};
  bool found = false;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      found = true;
      box.x_min = std::min(box.x_min, x);
      box.y_min = std::min(box.y_min, y);
      box.x_max = std::max(box.x_max, x);
      box.y_max = std::max(box.y_max, y);
    }
  }
  if (!found) return std::nullopt;
  return box;
}

Image to_grayscale(const Image& img) {
  if (img.channels() == 1) return img;
  Image gray(img.width(), img.height(), 1);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      // Fixed-point BT.601 weights (x1000) keep round-half-up exact.
      const int luma = 299 * img.at(x, y, 0) + 587 * img.at(x, y, 1) +
                       114 * img.at(x, y, 2);
      gray.at(x, y) = static_cast<std::uint8_t>((luma + 500) / 1000);
    }
  }
  return gray;
}

BinaryMask fill_box(int width, int height, const Box& box) {
  BinaryMask mask(width, height);
  const int x0 = std::max(box.x_min, 0);
  const int y0 = std::max(box.y_min, 0);
  const int x1 = std::min(box.x_max, width - 1);
  const int y1 = std::min(box.y_max, height - 1);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) mask.set(x, y);
  }
  return mask;
}

Image crop(const Image& img, const Box& box) {
  if (box.x_min < 0 || box.y_min < 0 || box.x_max >= img.width() ||
      box.y_max >= img.height() || box.x_min > box.x_max ||
      box.y_min > box.y_max) {
    throw Error(ErrorCode::kInvalidArgument, "crop box outside image");
  }
  Image out(box.width(), box.height(), img.channels());
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      for (int c = 0; c < img.channels(); ++c) {
        out.at(x, y, c) = img.at(x + box.x_min, y + box.y_min, c);
      }
    }
  }
  return out;
}

std::vector<Point> foreground_points(const BinaryMask& mask) {
  std::vector<Point> points;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask.at(x, y)) points.push_back({x, y});
    }
  }
  return points;
}

}  // namespace promptaug
