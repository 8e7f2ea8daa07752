#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "promptaug/harness.hpp"

namespace promptaug {

// Strategy name used for the deduplicated first-pass rows.
inline constexpr const char* kInitialStrategy = "initial";

struct AggregateRow {
  std::string group;  // dataset or dataset/category
  std::string strategy;
  RecordKind kind = RecordKind::kPoint;
  std::size_t total_points = 0;
  int rank = 0;
  double mean = 0.0;
  double std = 0.0;  // population std of the per-repeat means
  std::size_t samples = 0;
  std::size_t repeats = 0;
};

/// Groups by (group, strategy, kind, total points, rank), averages each
/// repeat over samples, then reports mean and population std across the
/// repeat means. Adds one "initial" row per (group, total points) from the
/// first-pass Dice of point records, and dataset-level rows when samples
/// carry a category. Output order is canonical, so record order is
/// irrelevant.
std::vector<AggregateRow> aggregate(const std::vector<ExperimentRecord>& records);

// "0.610±0.008"
std::string format_mean_std(double mean, double std);

// Column layout tag of records.csv, echoed in summary.md. Bump it when the
// columns change.
inline constexpr const char* kRecordsCsvVersion = "promptaug-records/1";

void write_records_csv(std::ostream& out,
                       const std::vector<ExperimentRecord>& records);
void write_timing_csv(std::ostream& out,
                      const std::vector<ExperimentRecord>& records);
void write_summary_md(std::ostream& out, const ExperimentConfig& cfg,
                      const RunResult& result,
                      const std::vector<AggregateRow>& rows);

// Writes records.csv, summary.md and timing.csv into `dir`.
void write_outputs(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                   const RunResult& result);

}  // namespace promptaug
