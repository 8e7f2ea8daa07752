#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "promptaug/imgcore.hpp"

namespace promptaug {

// Prompts for one segmenter call: any number of points, at most one box.
struct PromptSet {
  std::vector<PointPrompt> points;
  std::optional<Box> box;
  bool multimask = true;

  bool empty() const { return points.empty() && !box; }
};

struct SegmentationResult {
  BinaryMask mask;
  double score = 0.0;
};

class Segmenter {
 public:
  virtual ~Segmenter() = default;

  // `image_path` lets out-of-process segmenters read the file directly
  // instead of receiving a copy.
  virtual SegmentationResult segment(
      const Image& image, const PromptSet& prompts,
      const std::optional<std::filesystem::path>& image_path = std::nullopt) = 0;
  virtual std::string name() const = 0;
};

// Checks the request invariants shared by all segmenters: at least one
// prompt, everything inside the image.
void validate_prompts(const Image& image, const PromptSet& prompts);

// Intensity tolerance of the region-grow mock, in 8-bit levels.
inline constexpr int kRegionGrowTolerance = 8;

// Union over foreground points of the 4-connected near-constant-intensity
// component around each seed, truncated at Chebyshev radius `radius`.
class RegionGrowSegmenter final : public Segmenter {
 public:
  explicit RegionGrowSegmenter(int radius) : radius_(radius) {}
  SegmentationResult segment(
      const Image& image, const PromptSet& prompts,
      const std::optional<std::filesystem::path>& = std::nullopt) override;
  std::string name() const override;

 private:
  int radius_;
};

// Filled interior of the box prompt. Point prompts are ignored.
class BoxFillSegmenter final : public Segmenter {
 public:
  SegmentationResult segment(
      const Image& image, const PromptSet& prompts,
      const std::optional<std::filesystem::path>& = std::nullopt) override;
  std::string name() const override { return "mock_box_fill"; }
};

// Union of Euclidean disks around the foreground points; monotone in the
// prompt set, which is what the acceptance fixtures rely on.
class DiskSegmenter final : public Segmenter {
 public:
  explicit DiskSegmenter(int radius) : radius_(radius) {}
  SegmentationResult segment(
      const Image& image, const PromptSet& prompts,
      const std::optional<std::filesystem::path>& = std::nullopt) override;
  std::string name() const override;

 private:
  int radius_;
};

BinaryMask disk_mask(int width, int height, Point center, int radius);

struct ProcessSpec {
  std::vector<std::string> argv;
  std::chrono::milliseconds handshake_timeout{120'000};
  std::chrono::milliseconds request_timeout{60'000};
  // Send images inline as base64 PNG instead of by path.
  bool inline_images = false;
};

struct MockRegionGrow {
  int radius = 16;
};
struct MockBoxFill {};
struct MockDiskAroundSeeds {
  int radius = 8;
};
struct External {
  ProcessSpec spec;
};

using SegmenterKind =
    std::variant<MockRegionGrow, MockBoxFill, MockDiskAroundSeeds, External>;

std::unique_ptr<Segmenter> make_segmenter(const SegmenterKind& kind);

}  // namespace promptaug
