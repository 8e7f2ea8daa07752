#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "promptaug/config.hpp"
#include "promptaug/dataset.hpp"
#include "promptaug/saliency.hpp"
#include "promptaug/segmenter.hpp"

namespace promptaug {

enum class RecordKind { kPoint, kStability, kBox };

std::string_view record_kind_name(RecordKind kind);

// Bit flags on a record.
enum RecordFlag : unsigned {
  kFlagEmptyInitial = 1u << 0,       // augmented pass skipped
  kFlagNoCandidates = 1u << 1,       // source mask held only p0
  kFlagShortCandidates = 1u << 2,    // fewer than k candidates; used all
  kFlagSaliencyEmpty = 1u << 3,      // no salient pixel; fell back to random
  kFlagEmptyIntermediate = 1u << 4,  // box chain: empty first result
};

std::string flags_to_string(unsigned flags);  // "a|b", or "" for none

struct ExperimentRecord {
  std::string sample_id;
  std::string dataset;
  std::string group;
  std::string strategy;
  RecordKind kind = RecordKind::kPoint;
  std::size_t total_points = 0;  // point prompts in the final call
  int rank = 0;                  // 1..3 in the stability study, else 0
  std::size_t repeat = 0;
  std::uint64_t seed = 0;
  Point p0;
  std::vector<Point> augmented;
  std::optional<Box> box;  // box prompt of the final call
  double dice_initial = 0.0;
  double dice_augmented = 0.0;
  unsigned flags = 0;
  int segment_calls = 0;
  double elapsed_ms = 0.0;  // wall clock; kept out of records.csv
};

// Per-call seed: a stable hash of (base_seed, sample id, repeat, tag), so
// adding or reordering samples never changes another sample's draws.
std::uint64_t sample_seed(std::uint64_t base_seed, std::string_view sample_id,
                          std::size_t repeat, std::string_view tag);

/// Uniform seeded draw over GT foreground (or the foreground pixel nearest
/// the centroid, ties row-major, for kCentroid).
Point sample_initial_point(const BinaryMask& gt, std::uint64_t seed,
                           InitialPointRule rule = InitialPointRule::kUniform);

// First segmentation pass, shared by every strategy of one (sample, repeat).
struct InitialPass {
  Point p0;
  std::uint64_t seed = 0;
  SegmentationResult result;
  double dice = 0.0;
};

struct PipelineContext {
  Segmenter& segmenter;
  SaliencySource& saliency;
  const ExperimentConfig& cfg;
};

// With `segment` false only p0 is drawn; box-only runs never issue a
// point-only call.
InitialPass run_initial_pass(const Sample& sample, std::size_t repeat,
                             PipelineContext& ctx, bool segment = true);

/// Two-pass pipeline for one point strategy with `k` augmented points.
/// Segmenter errors are rethrown with the sample id prefixed.
ExperimentRecord run_point_pipeline(const Sample& sample,
                                    const PointStrategy& strategy,
                                    std::size_t k, const InitialPass& initial,
                                    std::size_t repeat, PipelineContext& ctx);

/// Top-3 candidates (three seeded draws for saliency), each run as its own
/// two-point call. Throws InsufficientCandidates below three candidates.
std::vector<ExperimentRecord> run_stability_study(const Sample& sample,
                                                  StrategyKind strategy,
                                                  const InitialPass& initial,
                                                  std::size_t repeat,
                                                  PipelineContext& ctx);

ExperimentRecord run_box_record(const Sample& sample, BoxScheme scheme,
                                const InitialPass& initial, std::size_t repeat,
                                PipelineContext& ctx);

struct Failure {
  std::string sample_id;
  std::string context;  // strategy name, "load" or "initial"
  ErrorCode code = ErrorCode::kInvalidArgument;
  std::string message;
};

struct RunResult {
  std::vector<ExperimentRecord> records;
  std::vector<Failure> failures;
  std::size_t samples = 0;
  LoadReport dataset_report;
};

using SegmenterFactory = std::function<std::unique_ptr<Segmenter>()>;
using SaliencyFactory = std::function<std::unique_ptr<SaliencySource>()>;

/// Runs every configured strategy over every sample and repeat. Samples are
/// spread over OpenMP threads, each with its own segmenter; records come
/// back ordered by (sample, repeat, strategy, k, rank) regardless of thread
/// count. Per-sample errors land in `failures`.
RunResult run_experiment(const ExperimentConfig& cfg, const Dataset& dataset,
                         const SegmenterFactory& segmenters,
                         const SaliencyFactory& saliency);

// Factories derived from the config.
RunResult run_experiment(const ExperimentConfig& cfg, const Dataset& dataset);

}  // namespace promptaug
