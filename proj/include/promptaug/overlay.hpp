#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "promptaug/harness.hpp"

namespace promptaug {

struct OverlayPanel {
  std::string name;  // file stem
  Image image;       // RGB
};

/// Renders one sample's prompt/mask chain as separate panels, in the
/// qualitative-figure layout: GT with p0, the initial result, then one
/// panel per strategy with its augmented points (and box, if any). Masks
/// are tinted, foreground points are green crosses, p0 is red.
std::vector<OverlayPanel> render_overlays(const Sample& sample,
                                          const ExperimentConfig& cfg,
                                          std::size_t repeat,
                                          PipelineContext& ctx);

// Panels side by side with a 4 px gutter.
Image tile_panels(const std::vector<OverlayPanel>& panels);

}  // namespace promptaug
