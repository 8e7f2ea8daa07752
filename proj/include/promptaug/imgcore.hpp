#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "promptaug/error.hpp"

namespace promptaug {

// Coordinates are (x = column, y = row), 0-based, everywhere in this library.
struct Point {
  int x = 0;
  int y = 0;

  friend bool operator==(const Point&, const Point&) = default;
};

enum class PointLabel : int { kBackground = 0, kForeground = 1 };

struct PointPrompt {
  Point point;
  PointLabel label = PointLabel::kForeground;

  friend bool operator==(const PointPrompt&, const PointPrompt&) = default;
};

// Inclusive pixel bounds.
struct Box {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  int width() const { return x_max - x_min + 1; }
  int height() const { return y_max - y_min + 1; }
  bool contains(Point p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
  bool contains(const Box& other) const {
    return other.x_min >= x_min && other.x_max <= x_max &&
           other.y_min >= y_min && other.y_max <= y_max;
  }

  friend bool operator==(const Box&, const Box&) = default;
};

// 8-bit image, row-major, channels interleaved. 1 (gray) or 3 (RGB) channels.
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels);
  Image(int width, int height, int channels, std::vector<std::uint8_t> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return pixels_.empty(); }

  std::uint8_t at(int x, int y, int c = 0) const {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  std::uint8_t& at(int x, int y, int c = 0) {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  bool in_bounds(Point p) const {
    return p.x >= 0 && p.y >= 0 && p.x < width_ && p.y < height_;
  }

  std::span<const std::uint8_t> pixels() const { return pixels_; }
  std::span<std::uint8_t> pixels() { return pixels_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  std::vector<std::uint8_t> pixels_;
};

class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, bool fill = false);
  BinaryMask(int width, int height, std::vector<std::uint8_t> bits);

  int width() const { return width_; }
  int height() const { return height_; }

  bool at(int x, int y) const {
    return bits_[static_cast<std::size_t>(y) * width_ + x] != 0;
  }
  bool at(Point p) const { return at(p.x, p.y); }
  void set(int x, int y, bool v = true) {
    bits_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0;
  }
  void set(Point p, bool v = true) { set(p.x, p.y, v); }

  bool in_bounds(Point p) const {
    return p.x >= 0 && p.y >= 0 && p.x < width_ && p.y < height_;
  }

  std::size_t count() const;
  bool any() const;
  bool same_shape(const BinaryMask& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  // Stored as one byte per pixel (0 or 1).
  std::span<const std::uint8_t> bits() const { return bits_; }

  BinaryMask& operator|=(const BinaryMask& other);
  BinaryMask& operator&=(const BinaryMask& other);

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

// COCO uncompressed RLE: column-major runs, alternating zeros then ones,
// always starting with a (possibly empty) zero run.
struct RleMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint32_t> counts;

  friend bool operator==(const RleMask&, const RleMask&) = default;
};

/// Dice coefficient 2|a∩b| / (|a|+|b|). Both empty scores 1, one empty 0.
double dice(const BinaryMask& a, const BinaryMask& b);

RleMask rle_encode(const BinaryMask& mask);
BinaryMask rle_decode(const RleMask& rle);

std::optional<Box> tight_bbox(const BinaryMask& mask);

/// BT.601 luma, rounded half up. Identity on single-channel input.
Image to_grayscale(const Image& img);

BinaryMask fill_box(int width, int height, const Box& box);
Image crop(const Image& img, const Box& box);

// Foreground pixels in row-major order.
std::vector<Point> foreground_points(const BinaryMask& mask);

}  // namespace promptaug
