#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "promptaug/imgcore.hpp"

namespace promptaug {

enum class StrategyKind { kRandom, kMaxEntropy, kMaxDistance, kSaliency };

std::string_view strategy_name(StrategyKind kind);
std::optional<StrategyKind> parse_strategy(std::string_view name);

// Eq. 4 is an argmax; the prose around it reads "minimal". kMin is the
// escape hatch for anyone who wants the other reading.
enum class DistanceMode { kMax, kMin };

// Points drawn from a source mask, row-major, never containing the initial
// point. Row-major position is the tie-break for every argmax below.
struct CandidateSet {
  int width = 0;
  int height = 0;
  std::vector<Point> points;
  std::optional<Point> excluded;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

struct PatchHistogram {
  Point center;
  std::array<std::uint32_t, 256> bin_counts{};
  int valid_count = 0;
};

/// All foreground pixels of `mask` except `p0`, in row-major order.
/// Throws EmptyCandidates if nothing is left.
CandidateSet build_candidates(const BinaryMask& mask, Point p0);

// Same as build_candidates but over an explicit point list that must lie in
// the grid; used for saliency-derived candidates.
CandidateSet candidates_from_points(int width, int height,
                                    std::vector<Point> points,
                                    std::optional<Point> exclude);

Point sample_random(const CandidateSet& candidates, std::uint64_t seed);

PatchHistogram patch_histogram(const Image& gray, Point p);
double histogram_entropy(const PatchHistogram& hist);

/// Shannon entropy in bits of the 9x9 intensity window around p, clipped to
/// the image. RGB input is converted to luma first.
double patch_entropy(const Image& img, Point p);

/// argmax over candidates of H(p_i) - H(p0).
Point sample_max_entropy(const Image& img, const CandidateSet& candidates,
                         Point p0);

Point sample_max_distance(const CandidateSet& candidates, Point p0,
                          DistanceMode mode = DistanceMode::kMax);

struct TopKInputs {
  const Image* image = nullptr;            // required for kMaxEntropy
  const CandidateSet* candidates = nullptr;
  Point p0;
  std::uint64_t seed = 0;                  // kRandom / kSaliency
  DistanceMode distance_mode = DistanceMode::kMax;
};

/// k points for one strategy. The criterion strategies return the k best in
/// descending order; the random ones return k distinct seeded draws. For
/// kSaliency the caller passes the saliency-derived candidate set.
std::vector<Point> sample_top_k(StrategyKind strategy, std::size_t k,
                                const TopKInputs& inputs);

// Criterion values used for ranking, exposed for the stability study and
// for reporting.
std::vector<double> entropy_gains(const Image& img,
                                  const CandidateSet& candidates, Point p0);

}  // namespace promptaug
