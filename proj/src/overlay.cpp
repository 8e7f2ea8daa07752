#include "promptaug/overlay.hpp"

#include <algorithm>
#include <array>

namespace promptaug {

namespace {

using Rgb = std::array<std::uint8_t, 3>;

constexpr Rgb kGtTint{255, 200, 0};
constexpr Rgb kMaskTint{0, 160, 255};
constexpr Rgb kInitialPoint{230, 30, 30};
constexpr Rgb kAugmentedPoint{40, 220, 60};
constexpr Rgb kBoxColor{255, 255, 0};

Image to_rgb(const Image& img) {
  if (img.channels() == 3) return img;
  Image out(img.width(), img.height(), 3);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(x, y, 0);
    }
  }
  return out;
}

void tint(Image& img, const BinaryMask& mask, Rgb color) {
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (!mask.at(x, y)) continue;
      for (int c = 0; c < 3; ++c) {
        img.at(x, y, c) = static_cast<std::uint8_t>(
            (img.at(x, y, c) * 55 + color[c] * 45 + 50) / 100);
      }
    }
  }
}

void put(Image& img, int x, int y, Rgb color) {
  if (!img.in_bounds({x, y})) return;
  for (int c = 0; c < 3; ++c) img.at(x, y, c) = color[c];
}

void cross(Image& img, Point p, Rgb color) {
  for (int d = -3; d <= 3; ++d) {
    put(img, p.x + d, p.y, color);
    put(img, p.x, p.y + d, color);
  }
}

void outline(Image& img, const Box& b, Rgb color) {
  for (int x = b.x_min; x <= b.x_max; ++x) {
    put(img, x, b.y_min, color);
    put(img, x, b.y_max, color);
  }
  for (int y = b.y_min; y <= b.y_max; ++y) {
    put(img, b.x_min, y, color);
    put(img, b.x_max, y, color);
  }
}

}  // namespace

std::vector<OverlayPanel> render_overlays(const Sample& sample,
                                          const ExperimentConfig& cfg,
                                          std::size_t repeat,
                                          PipelineContext& ctx) {
  const Image base = to_rgb(sample.image);
  std::vector<OverlayPanel> panels;
  bool point_pass = false;
  for (const auto& s : cfg.strategies) {
    if (!s.is_box()) point_pass = true;
  }
  const InitialPass initial = run_initial_pass(sample, repeat, ctx, point_pass);

  Image gt = base;
  tint(gt, sample.gt_mask, kGtTint);
  cross(gt, initial.p0, kInitialPoint);
  panels.push_back({"0_gt", std::move(gt)});

  if (point_pass) {
    Image first = base;
    tint(first, initial.result.mask, kMaskTint);
    cross(first, initial.p0, kInitialPoint);
    panels.push_back({"1_initial", std::move(first)});
  }

  int n = 2;
  for (const auto& strategy : cfg.strategies) {
    ExperimentRecord rec;
    if (const auto* box = std::get_if<BoxScheme>(&strategy.what)) {
      rec = run_box_record(sample, *box, initial, repeat, ctx);
    } else {
      rec = run_point_pipeline(sample, std::get<PointStrategy>(strategy.what),
                               cfg.extra_points.front(), initial, repeat, ctx);
    }
    PromptSet prompts;
    if (rec.kind == RecordKind::kBox) {
      if (rec.total_points > 0) prompts.points.push_back({rec.p0, PointLabel::kForeground});
    } else {
      prompts.points.push_back({rec.p0, PointLabel::kForeground});
    }
    for (Point p : rec.augmented) prompts.points.push_back({p, PointLabel::kForeground});
    prompts.box = rec.box;

    Image panel = base;
    if (!prompts.empty() && !(rec.flags & kFlagEmptyIntermediate)) {
      tint(panel, ctx.segmenter.segment(sample.image, prompts, sample.image_path).mask,
           kMaskTint);
    }
    if (rec.box) outline(panel, *rec.box, kBoxColor);
    if (!prompts.points.empty()) cross(panel, rec.p0, kInitialPoint);
    for (Point p : rec.augmented) cross(panel, p, kAugmentedPoint);
    panels.push_back({std::to_string(n++) + "_" + rec.strategy, std::move(panel)});
  }
  return panels;
}

Image tile_panels(const std::vector<OverlayPanel>& panels) {
  constexpr int kGutter = 4;
  int width = 0, height = 0;
  for (const auto& p : panels) {
    width += p.image.width() + (width > 0 ? kGutter : 0);
    height = std::max(height, p.image.height());
  }
  Image out(std::max(width, 1), std::max(height, 1), 3);
  int x0 = 0;
  for (const auto& p : panels) {
    for (int y = 0; y < p.image.height(); ++y) {
      for (int x = 0; x < p.image.width(); ++x) {
        for (int c = 0; c < 3; ++c) out.at(x0 + x, y, c) = p.image.at(x, y, c);
      }
    }
    x0 += p.image.width() + kGutter;
  }
  return out;
}

}  // namespace promptaug
