#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "promptaug/boxaug.hpp"
#include "promptaug/dataset.hpp"
#include "promptaug/sampling.hpp"
#include "promptaug/segmenter.hpp"

namespace promptaug {

enum class PointSource { kInitialMask, kGtMask };
enum class InitialPointRule { kUniform, kCentroid };

struct SyntheticSpec {
  std::string name = "two_blob";
  std::size_t count = 200;
  std::uint64_t seed = 0;
};
struct DirSpec {
  std::string name;
  std::filesystem::path images;
  std::filesystem::path masks;
};
struct CocoSpec {
  std::string name = "coco";
  std::filesystem::path annotations;
  std::filesystem::path images;
  CocoSelection selection;
};
using DatasetSpec = std::variant<SyntheticSpec, DirSpec, CocoSpec>;

// One configured strategy. Point strategies carry their candidate source;
// the name gets a "gt_" prefix when that source is the GT mask.
struct PointStrategy {
  StrategyKind kind = StrategyKind::kMaxDistance;
  PointSource source = PointSource::kInitialMask;
};
struct StrategySpec {
  std::variant<PointStrategy, BoxScheme> what;

  std::string name() const;
  bool is_box() const { return std::holds_alternative<BoxScheme>(what); }
};

struct SaliencyProvider {
  bool external = false;
  ProcessSpec spec;  // used when external
};

struct ExperimentConfig {
  DatasetSpec dataset = SyntheticSpec{};
  SegmenterKind segmenter = MockDiskAroundSeeds{};
  std::vector<StrategySpec> strategies;
  std::vector<std::size_t> extra_points{1};
  // Strategies that also get the top-3 stability study.
  std::vector<StrategyKind> stability;
  std::size_t repeats = 3;
  std::uint64_t base_seed = 0;
  DistanceMode distance_mode = DistanceMode::kMax;
  SaliencyProvider saliency;
  InitialPointRule initial_point = InitialPointRule::kUniform;
  int crop_margin = 10;
  std::size_t workers = 0;  // 0 = OpenMP default
  std::filesystem::path output_dir = "promptaug_out";
  bool strict = false;
};

/// Parses and validates a config document. Relative paths resolve against
/// `base_dir`. Throws Error(kConfigError) with a field-qualified message.
ExperimentConfig parse_config(const nlohmann::json& doc,
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

StrategySpec parse_strategy_spec(std::string_view name,
                                 PointSource default_source);

// An adapter path from PROMPTAUG_ADAPTER, if set, replaces argv[0] of every
// external process spec.
void apply_adapter_override(ExperimentConfig& cfg);

std::unique_ptr<Dataset> make_dataset(const DatasetSpec& spec);

}  // namespace promptaug
