#include "promptaug/boxaug.hpp"

#include "promptaug/rng.hpp"

namespace promptaug {

std::string_view box_scheme_name(BoxScheme scheme) {
  switch (scheme) {
    case BoxScheme::kInnerOfGt: return "inner_box_gt";
    case BoxScheme::kOuterOfGt: return "outer_box_gt";
    case BoxScheme::kInnerOfInitialBoxResult: return "inner_box_initial_box";
    case BoxScheme::kOuterOfInitialBoxResult: return "outer_box_initial_box";
    case BoxScheme::kOuterOfInitialPointResult: return "outer_box_initial_point";
  }
  return "unknown";
}

std::optional<BoxScheme> parse_box_scheme(std::string_view name) {
  for (auto s : {BoxScheme::kInnerOfGt, BoxScheme::kOuterOfGt,
                 BoxScheme::kInnerOfInitialBoxResult,
                 BoxScheme::kOuterOfInitialBoxResult,
                 BoxScheme::kOuterOfInitialPointResult}) {
    if (box_scheme_name(s) == name) return s;
  }
  return std::nullopt;
}

namespace {

bool column_inside(const BinaryMask& m, int x, int y0, int y1) {
  if (x < 0 || x >= m.width()) return false;
  for (int y = y0; y <= y1; ++y) {
    if (!m.at(x, y)) return false;
  }
  return true;
}

bool row_inside(const BinaryMask& m, int y, int x0, int x1) {
  if (y < 0 || y >= m.height()) return false;
  for (int x = x0; x <= x1; ++x) {
    if (!m.at(x, y)) return false;
  }
  return true;
}

}  // namespace

Box inner_box_from(const BinaryMask& mask, Point center) {
  if (!mask.in_bounds(center) || !mask.at(center)) {
    throw Error(ErrorCode::kInvalidArgument,
                "inner box center must be a foreground pixel");
  }
  Box b{center.x, center.y, center.x, center.y};
  bool left = true, top = true, right = true, bottom = true;
  while (left || top || right || bottom) {
    if (left) {
      if (column_inside(mask, b.x_min - 1, b.y_min, b.y_max)) --b.x_min;
      else left = false;
    }
    if (top) {
      if (row_inside(mask, b.y_min - 1, b.x_min, b.x_max)) --b.y_min;
      else top = false;
    }
    if (right) {
      if (column_inside(mask, b.x_max + 1, b.y_min, b.y_max)) ++b.x_max;
      else right = false;
    }
    if (bottom) {
      if (row_inside(mask, b.y_max + 1, b.x_min, b.x_max)) ++b.y_max;
      else bottom = false;
    }
  }
  return b;
}

Box inner_box(const BinaryMask& mask, std::uint64_t seed) {
  const auto points = foreground_points(mask);
  if (points.empty()) throw Error(ErrorCode::kEmptyMask, "inner_box: empty mask");
  SplitMix64 rng(seed);
  return inner_box_from(mask, points[rng.below(points.size())]);
}

Box outer_box(const BinaryMask& mask) {
  const auto box = tight_bbox(mask);
  if (!box) throw Error(ErrorCode::kEmptyMask, "outer_box: empty mask");
  return *box;
}

BoxChain run_box_scheme(BoxScheme scheme, const Image& image,
                        const BinaryMask& gt_mask, Segmenter& segmenter,
                        std::uint64_t seed, Point p0,
                        const std::optional<std::filesystem::path>& image_path) {
  if (!gt_mask.any()) {
    throw Error(ErrorCode::kEmptyMask, "box scheme needs a nonempty GT mask");
  }
  BoxChain chain;
  auto call = [&](const PromptSet& prompts) {
    ++chain.segment_calls;
    return segmenter.segment(image, prompts, image_path);
  };
  auto empty_final = [&] {
    chain.final_result = {BinaryMask(image.width(), image.height()), 0.0};
    chain.empty_intermediate = true;
  };

  switch (scheme) {
    case BoxScheme::kInnerOfGt:
    case BoxScheme::kOuterOfGt: {
      chain.initial_prompts.box = scheme == BoxScheme::kInnerOfGt
                                      ? inner_box(gt_mask, seed)
                                      : outer_box(gt_mask);
      chain.initial = call(chain.initial_prompts);
      chain.final_prompts = chain.initial_prompts;
      chain.final_result = chain.initial;
      return chain;
    }
    case BoxScheme::kInnerOfInitialBoxResult:
    case BoxScheme::kOuterOfInitialBoxResult: {
      chain.initial_prompts.box = inner_box(gt_mask, seed);
      chain.initial = call(chain.initial_prompts);
      if (!chain.initial.mask.any()) {
        empty_final();
        return chain;
      }
      // Second call is box-only; the first box is not carried over.
      chain.final_prompts.box =
          scheme == BoxScheme::kInnerOfInitialBoxResult
              ? inner_box(chain.initial.mask, derive_seed(seed, {1}))
              : outer_box(chain.initial.mask);
      chain.final_result = call(chain.final_prompts);
      return chain;
    }
    case BoxScheme::kOuterOfInitialPointResult: {
      chain.initial_prompts.points = {{p0, PointLabel::kForeground}};
      chain.initial = call(chain.initial_prompts);
      if (!chain.initial.mask.any()) {
        empty_final();
        return chain;
      }
      chain.final_prompts.points = chain.initial_prompts.points;
      chain.final_prompts.box = outer_box(chain.initial.mask);
      chain.final_result = call(chain.final_prompts);
      return chain;
    }
  }
  return chain;
}

}  // namespace promptaug
