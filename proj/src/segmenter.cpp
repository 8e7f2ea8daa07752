#include "promptaug/segmenter.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <string>

#include "promptaug/external.hpp"

namespace promptaug {

void validate_prompts(const Image& image, const PromptSet& prompts) {
  if (prompts.empty()) {
    throw Error(ErrorCode::kInvalidPrompt, "request carries no prompt");
  }
  for (const auto& p : prompts.points) {
    if (!image.in_bounds(p.point)) {
      throw Error(ErrorCode::kInvalidPrompt,
                  "point (" + std::to_string(p.point.x) + "," +
                      std::to_string(p.point.y) + ") outside image");
    }
  }
  if (prompts.box) {
    const Box& b = *prompts.box;
    if (b.x_min > b.x_max || b.y_min > b.y_max || b.x_min < 0 || b.y_min < 0 ||
        b.x_max >= image.width() || b.y_max >= image.height()) {
      throw Error(ErrorCode::kInvalidPrompt, "box outside image or inverted");
    }
  }
}

namespace {

std::vector<Point> foreground_seeds(const PromptSet& prompts) {
  std::vector<Point> seeds;
  for (const auto& p : prompts.points) {
    if (p.label == PointLabel::kForeground) seeds.push_back(p.point);
  }
  return seeds;
}

}  // namespace

SegmentationResult RegionGrowSegmenter::segment(
    const Image& image, const PromptSet& prompts,
    const std::optional<std::filesystem::path>&) {
  validate_prompts(image, prompts);
  const auto seeds = foreground_seeds(prompts);
  if (seeds.empty()) {
    throw Error(ErrorCode::kInvalidPrompt,
                "region-grow mock needs a foreground point");
  }
  const Image gray = to_grayscale(image);
  BinaryMask out(image.width(), image.height());
  BinaryMask visited(image.width(), image.height());
  std::deque<Point> queue;
  constexpr Point kSteps[] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  for (Point seed : seeds) {
    const int ref = gray.at(seed.x, seed.y);
    visited = BinaryMask(image.width(), image.height());
    visited.set(seed);
    queue.assign(1, seed);
    while (!queue.empty()) {
      const Point p = queue.front();
      queue.pop_front();
      out.set(p);
      for (Point step : kSteps) {
        const Point q{p.x + step.x, p.y + step.y};
        if (!gray.in_bounds(q) || visited.at(q)) continue;
        if (std::max(std::abs(q.x - seed.x), std::abs(q.y - seed.y)) > radius_)
          continue;
        if (std::abs(gray.at(q.x, q.y) - ref) > kRegionGrowTolerance) continue;
        visited.set(q);
        queue.push_back(q);
      }
    }
  }
  return {std::move(out), 1.0};
}

std::string RegionGrowSegmenter::name() const {
  return "mock_region_grow(" + std::to_string(radius_) + ")";
}

SegmentationResult BoxFillSegmenter::segment(
    const Image& image, const PromptSet& prompts,
    const std::optional<std::filesystem::path>&) {
  validate_prompts(image, prompts);
  if (!prompts.box) {
    throw Error(ErrorCode::kInvalidPrompt, "box-fill mock needs a box prompt");
  }
  return {fill_box(image.width(), image.height(), *prompts.box), 1.0};
}

BinaryMask disk_mask(int width, int height, Point center, int radius) {
  BinaryMask mask(width, height);
  const long r2 = static_cast<long>(radius) * radius;
  for (int y = std::max(center.y - radius, 0);
       y <= std::min(center.y + radius, height - 1); ++y) {
    for (int x = std::max(center.x - radius, 0);
         x <= std::min(center.x + radius, width - 1); ++x) {
      const long dx = x - center.x;
      const long dy = y - center.y;
      if (dx * dx + dy * dy <= r2) mask.set(x, y);
    }
  }
  return mask;
}

SegmentationResult DiskSegmenter::segment(
    const Image& image, const PromptSet& prompts,
    const std::optional<std::filesystem::path>&) {
  validate_prompts(image, prompts);
  const auto seeds = foreground_seeds(prompts);
  if (seeds.empty()) {
    throw Error(ErrorCode::kInvalidPrompt, "disk mock needs a foreground point");
  }
  BinaryMask out(image.width(), image.height());
  for (Point s : seeds) out |= disk_mask(image.width(), image.height(), s, radius_);
  return {std::move(out), 1.0};
}

std::string DiskSegmenter::name() const {
  return "mock_disk(" + std::to_string(radius_) + ")";
}

std::unique_ptr<Segmenter> make_segmenter(const SegmenterKind& kind) {
  struct Visitor {
    std::unique_ptr<Segmenter> operator()(const MockRegionGrow& k) const {
      return std::make_unique<RegionGrowSegmenter>(k.radius);
    }
    std::unique_ptr<Segmenter> operator()(const MockBoxFill&) const {
      return std::make_unique<BoxFillSegmenter>();
    }
    std::unique_ptr<Segmenter> operator()(const MockDiskAroundSeeds& k) const {
      return std::make_unique<DiskSegmenter>(k.radius);
    }
    std::unique_ptr<Segmenter> operator()(const External& k) const {
      return std::make_unique<ExternalSegmenter>(k.spec);
    }
  };
  return std::visit(Visitor{}, kind);
}

}  // namespace promptaug
