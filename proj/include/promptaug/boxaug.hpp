#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>

#include "promptaug/imgcore.hpp"
#include "promptaug/segmenter.hpp"

namespace promptaug {

enum class BoxScheme {
  kInnerOfGt,
  kOuterOfGt,
  kInnerOfInitialBoxResult,
  kOuterOfInitialBoxResult,
  kOuterOfInitialPointResult,
};

std::string_view box_scheme_name(BoxScheme scheme);
std::optional<BoxScheme> parse_box_scheme(std::string_view name);

/// Greedy inner box: start from a seeded foreground pixel and grow each side
/// by one pixel per step until growing it again would take in a background
/// pixel or leave the image. Sides are tried in left, top, right, bottom
/// order within a step.
Box inner_box(const BinaryMask& mask, std::uint64_t seed);

// Inner box grown from an explicit center (must be foreground).
Box inner_box_from(const BinaryMask& mask, Point center);

/// Tight bounding box; throws EmptyMask on an empty mask.
Box outer_box(const BinaryMask& mask);

struct BoxChain {
  // First-pass result: the Initial Box Result for the inner-box schemes,
  // the point result for kOuterOfInitialPointResult, and the only result
  // for the single-call schemes.
  SegmentationResult initial;
  SegmentationResult final_result;
  PromptSet initial_prompts;
  PromptSet final_prompts;
  int segment_calls = 0;
  bool empty_intermediate = false;  // final scored as an empty mask
};

/// Runs one scheme end to end. `p0` is only used by
/// kOuterOfInitialPointResult.
BoxChain run_box_scheme(BoxScheme scheme, const Image& image,
                        const BinaryMask& gt_mask, Segmenter& segmenter,
                        std::uint64_t seed, Point p0,
                        const std::optional<std::filesystem::path>& image_path =
                            std::nullopt);

}  // namespace promptaug
