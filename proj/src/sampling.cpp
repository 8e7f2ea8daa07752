#include "promptaug/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "promptaug/kernels.hpp"
#include "promptaug/rng.hpp"

namespace promptaug {

std::string_view strategy_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kRandom: return "random";
    case StrategyKind::kMaxEntropy: return "max_entropy";
    case StrategyKind::kMaxDistance: return "max_distance";
    case StrategyKind::kSaliency: return "saliency";
  }
  return "unknown";
}

std::optional<StrategyKind> parse_strategy(std::string_view name) {
  for (auto kind : {StrategyKind::kRandom, StrategyKind::kMaxEntropy,
                    StrategyKind::kMaxDistance, StrategyKind::kSaliency}) {
    if (strategy_name(kind) == name) return kind;
  }
  return std::nullopt;
}

namespace {

bool row_major_less(Point a, Point b) {
  return a.y != b.y ? a.y < b.y : a.x < b.x;
}

void require_nonempty(const CandidateSet& c) {
  if (c.empty()) {
    throw Error(ErrorCode::kEmptyCandidates, "candidate set is empty");
  }
}

// Indices of the k best scores (descending), ties by row-major position of
// the point rather than by where it sits in the vector.
template <typename Score>
std::vector<std::size_t> rank_desc(const std::vector<Score>& scores,
                                   const std::vector<Point>& points,
                                   std::size_t k) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return row_major_less(points[a], points[b]);
  };
  k = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k),
                    idx.end(), better);
  idx.resize(k);
  return idx;
}

std::vector<Point> distinct_draws(const CandidateSet& c, std::size_t k,
                                  std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<Point> pool = c.points;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace

CandidateSet build_candidates(const BinaryMask& mask, Point p0) {
  CandidateSet c{mask.width(), mask.height(), {}, std::nullopt};
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      if (x == p0.x && y == p0.y) {
        c.excluded = p0;
        continue;
      }
      c.points.push_back({x, y});
    }
  }
  if (c.points.empty()) {
    throw Error(ErrorCode::kEmptyCandidates,
                "no candidate pixels besides the initial point");
  }
  return c;
}

CandidateSet candidates_from_points(int width, int height,
                                    std::vector<Point> points,
                                    std::optional<Point> exclude) {
  CandidateSet c{width, height, {}, std::nullopt};
  std::sort(points.begin(), points.end(), row_major_less);
  points.erase(std::unique(points.begin(), points.end()), points.end());
  for (Point p : points) {
    if (p.x < 0 || p.y < 0 || p.x >= width || p.y >= height) {
      throw Error(ErrorCode::kInvalidArgument, "candidate outside grid");
    }
    if (exclude && p == *exclude) {
      c.excluded = p;
      continue;
    }
    c.points.push_back(p);
  }
  return c;
}

Point sample_random(const CandidateSet& candidates, std::uint64_t seed) {
  require_nonempty(candidates);
  SplitMix64 rng(seed);
  return candidates.points[rng.below(candidates.size())];
}

PatchHistogram patch_histogram(const Image& gray, Point p) {
  PatchHistogram hist;
  hist.center = p;
  const int r = kernels::kEntropyPatchRadius;
  for (int y = std::max(p.y - r, 0); y <= std::min(p.y + r, gray.height() - 1);
       ++y) {
    for (int x = std::max(p.x - r, 0); x <= std::min(p.x + r, gray.width() - 1);
         ++x) {
      ++hist.bin_counts[gray.at(x, y)];
      ++hist.valid_count;
    }
  }
  return hist;
}

double histogram_entropy(const PatchHistogram& hist) {
  double h = 0.0;
  for (std::uint32_t c : hist.bin_counts) {
    if (c == 0) continue;
    const double prob = static_cast<double>(c) / hist.valid_count;
    h -= prob * std::log2(prob);
  }
  return h;
}

double patch_entropy(const Image& img, Point p) {
  if (!img.in_bounds(p)) {
    throw Error(ErrorCode::kInvalidArgument, "patch_entropy: point outside image");
  }
  if (img.channels() == 1) return kernels::entropy_at(img, p);
  return kernels::entropy_at(to_grayscale(img), p);
}

std::vector<double> entropy_gains(const Image& img,
                                  const CandidateSet& candidates, Point p0) {
  const Image gray = to_grayscale(img);
  if (gray.width() != candidates.width || gray.height() != candidates.height) {
    throw Error(ErrorCode::kDimensionMismatch,
                "candidate grid does not match image");
  }
  const double h0 = kernels::entropy_at(gray, p0);
  auto gains = kernels::omp::patch_entropies(gray, candidates.points);
  for (double& g : gains) g -= h0;
  return gains;
}

Point sample_max_entropy(const Image& img, const CandidateSet& candidates,
                         Point p0) {
  require_nonempty(candidates);
  const auto gains = entropy_gains(img, candidates, p0);
  return candidates.points[rank_desc(gains, candidates.points, 1).front()];
}

namespace {

std::vector<std::int64_t> distance_scores(const CandidateSet& c, Point p0,
                                          DistanceMode mode) {
  auto d = kernels::omp::squared_distances(c.points, p0);
  if (mode == DistanceMode::kMin) {
    for (auto& v : d) v = -v;
  }
  return d;
}

}  // namespace

Point sample_max_distance(const CandidateSet& candidates, Point p0,
                          DistanceMode mode) {
  require_nonempty(candidates);
  const auto scores = distance_scores(candidates, p0, mode);
  return candidates.points[rank_desc(scores, candidates.points, 1).front()];
}

std::vector<Point> sample_top_k(StrategyKind strategy, std::size_t k,
                                const TopKInputs& inputs) {
  if (inputs.candidates == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "sample_top_k: no candidates");
  }
  const CandidateSet& c = *inputs.candidates;
  if (k == 0) return {};
  if (c.size() < k) {
    throw Error(ErrorCode::kInsufficientCandidates,
                "need " + std::to_string(k) + " candidates, have " +
                    std::to_string(c.size()));
  }
  std::vector<Point> out;
  switch (strategy) {
    case StrategyKind::kRandom:
    case StrategyKind::kSaliency:
      return distinct_draws(c, k, inputs.seed);
    case StrategyKind::kMaxEntropy: {
      if (inputs.image == nullptr) {
        throw Error(ErrorCode::kInvalidArgument,
                    "max-entropy sampling needs the image");
      }
      const auto gains = entropy_gains(*inputs.image, c, inputs.p0);
      for (auto i : rank_desc(gains, c.points, k)) out.push_back(c.points[i]);
      return out;
    }
    case StrategyKind::kMaxDistance: {
      const auto scores = distance_scores(c, inputs.p0, inputs.distance_mode);
      for (auto i : rank_desc(scores, c.points, k)) out.push_back(c.points[i]);
      return out;
    }
  }
  return out;
}

}  // namespace promptaug
