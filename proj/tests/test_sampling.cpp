#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include "oracles.hpp"
#include "promptaug/sampling.hpp"

using namespace promptaug;

namespace {

double dist2(Point a, Point b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

// Full stable ranking by score descending, ties row-major, as an oracle for
// the criterion top-k.
template <typename Score>
std::vector<Point> ranking(const BinaryMask& mask, Point p0, Score score) {
  std::vector<std::pair<double, Point>> all;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask.at(x, y) && !(x == p0.x && y == p0.y))
        all.push_back({score(Point{x, y}), Point{x, y}});
  std::stable_sort(all.begin(), all.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<Point> out;
  for (const auto& e : all) out.push_back(e.second);
  return out;
}

// Random mask with p0 placed on a foreground pixel.
std::pair<BinaryMask, Point> instance(SplitMix64& rng, int w, int h) {
  for (;;) {
    auto m = oracle::random_mask(rng, w, h, 5 + static_cast<int>(rng.below(80)));
    const auto pts = foreground_points(m);
    if (pts.size() < 2) continue;
    return {m, pts[rng.below(pts.size())]};
  }
}

}  // namespace

TEST_CASE("build_candidates excludes p0 and keeps row-major order") {
  const BinaryMask ones(3, 3, true);
  const auto c = build_candidates(ones, {1, 1});
  CHECK(c.size() == 8);
  CHECK(c.excluded == Point{1, 1});
  CHECK(c.points.front() == Point{0, 0});
  CHECK(c.points.back() == Point{2, 2});
  for (std::size_t i = 1; i < c.size(); ++i) {
    const auto a = c.points[i - 1], b = c.points[i];
    CHECK((a.y < b.y || (a.y == b.y && a.x < b.x)));
  }
}

TEST_CASE("build_candidates on a mask holding only p0 throws") {
  BinaryMask m(4, 4);
  m.set(2, 2);
  try {
    build_candidates(m, {2, 2});
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptyCandidates);
  }
  CHECK_THROWS_AS(build_candidates(BinaryMask(4, 4), {0, 0}), Error);
}

TEST_CASE("every candidate is a foreground pixel other than p0") {
  SplitMix64 rng(1);
  for (int i = 0; i < 100; ++i) {
    auto [m, p0] = instance(rng, 1 + static_cast<int>(rng.below(30)),
                            1 + static_cast<int>(rng.below(30)));
    const auto c = build_candidates(m, p0);
    CHECK(c.size() == m.count() - 1);
    for (Point p : c.points) {
      CHECK(m.at(p));
      CHECK_FALSE(p == p0);
    }
  }
}

TEST_CASE("sample_random: singleton, determinism, uniformity") {
  const CandidateSet one{5, 5, {{3, 2}}, std::nullopt};
  for (std::uint64_t s = 0; s < 50; ++s) CHECK(sample_random(one, s) == Point{3, 2});

  const CandidateSet four{2, 2, {{0, 0}, {1, 0}, {0, 1}, {1, 1}}, std::nullopt};
  CHECK(sample_random(four, 99) == sample_random(four, 99));

  std::array<int, 4> hist{};
  constexpr int kDraws = 100000;
  for (int i = 0; i < kDraws; ++i) {
    const Point p = sample_random(four, derive_seed(7, {static_cast<std::uint64_t>(i)}));
    ++hist[p.y * 2 + p.x];
  }
  double chi2 = 0.0;
  for (int c : hist) {
    CHECK(std::abs(c / double(kDraws) - 0.25) <= 0.02);
    chi2 += (c - kDraws / 4.0) * (c - kDraws / 4.0) / (kDraws / 4.0);
  }
  // 3 degrees of freedom, p = 0.001.
  CHECK(chi2 < 16.27);
}

TEST_CASE("patch entropy closed forms") {
  const Image flat(20, 20, 1, std::vector<std::uint8_t>(400, 77));
  CHECK(patch_entropy(flat, {10, 10}) == 0.0);

  // 40 pixels at 10, 41 at 200 in the window around (10,10).
  Image two(21, 21, 1);
  int n = 0;
  for (int y = 6; y <= 14; ++y)
    for (int x = 6; x <= 14; ++x) two.at(x, y) = (n++ < 40) ? 10 : 200;
  const double want = -(40.0 / 81) * std::log2(40.0 / 81) - (41.0 / 81) * std::log2(41.0 / 81);
  CHECK(std::abs(patch_entropy(two, {10, 10}) - want) < 1e-12);
}

TEST_CASE("patch histogram counts only in-bounds pixels") {
  SplitMix64 rng(2);
  const auto img = oracle::random_gray(rng, 12, 10, 256);
  const auto corner = patch_histogram(img, {0, 0});
  CHECK(corner.valid_count == 25);
  const auto center = patch_histogram(img, {6, 5});
  CHECK(center.valid_count == 81);
  std::uint32_t sum = 0;
  for (auto c : center.bin_counts) sum += c;
  CHECK(sum == 81);
  CHECK(histogram_entropy(center) == patch_entropy(img, {6, 5}));
}

TEST_CASE("patch entropy matches the oracle and converts RGB to luma") {
  SplitMix64 rng(4);
  for (int i = 0; i < 10; ++i) {
    const auto img = oracle::random_gray(rng, 32, 32, 1 + static_cast<int>(rng.below(40)));
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x)
        CHECK(std::abs(patch_entropy(img, {x, y}) - oracle::entropy(img, {x, y})) < 1e-12);
  }
  Image rgb(16, 16, 3);
  for (auto& v : rgb.pixels()) v = static_cast<std::uint8_t>(rng.below(256));
  const auto gray = to_grayscale(rgb);
  CHECK(patch_entropy(rgb, {5, 5}) == oracle::entropy(gray, {5, 5}));
}

TEST_CASE("patch entropy is translation covariant away from borders") {
  SplitMix64 rng(6);
  const auto small = oracle::random_gray(rng, 20, 20, 16);
  Image big(40, 40, 1);
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 20; ++x) big.at(x + 11, y + 7) = small.at(x, y);
  for (int y = 4; y < 16; ++y)
    for (int x = 4; x < 16; ++x)
      CHECK(patch_entropy(small, {x, y}) == patch_entropy(big, {x + 11, y + 7}));
}

TEST_CASE("adding a new intensity keeps entropy at or above the present-bin bound") {
  SplitMix64 rng(12);
  for (int i = 0; i < 50; ++i) {
    auto img = oracle::random_gray(rng, 9, 9, 1 + static_cast<int>(rng.below(5)));
    const double before = patch_entropy(img, {4, 4});
    img.at(static_cast<int>(rng.below(9)), static_cast<int>(rng.below(9))) = 255;
    std::set<int> present;
    for (auto v : img.pixels()) present.insert(v);
    const double after = patch_entropy(img, {4, 4});
    CHECK(after == doctest::Approx(oracle::entropy(img, {4, 4})).epsilon(1e-12));
    CHECK(after <= std::log2(static_cast<double>(present.size())) + 1e-12);
    CHECK(after >= 0.0);
    (void)before;
  }
}

TEST_CASE("max entropy: constant image picks the first candidate") {
  const Image flat(8, 8, 1, std::vector<std::uint8_t>(64, 5));
  const auto c = build_candidates(BinaryMask(8, 8, true), {0, 0});
  CHECK(sample_max_entropy(flat, c, {0, 0}) == Point{1, 0});
}

TEST_CASE("max entropy lands in a noise patch") {
  Image img(40, 40, 1, std::vector<std::uint8_t>(1600, 100));
  SplitMix64 rng(3);
  for (int y = 25; y < 35; ++y)
    for (int x = 25; x < 35; ++x) img.at(x, y) = static_cast<std::uint8_t>(rng.below(256));
  const auto c = build_candidates(BinaryMask(40, 40, true), {5, 5});
  const Point p = sample_max_entropy(img, c, {5, 5});
  CHECK(p.x >= 21);
  CHECK(p.x <= 38);
  CHECK(p.y >= 21);
  CHECK(p.y <= 38);
  const auto want = oracle::argmax_scan(BinaryMask(40, 40, true), {5, 5},
                                        [&](Point q) { return oracle::entropy(img, q); });
  CHECK(p == *want);
}

TEST_CASE("max distance examples") {
  const CandidateSet c{5, 5, {{1, 1}, {3, 4}}, std::nullopt};
  CHECK(sample_max_distance(c, {0, 0}) == Point{3, 4});
  CHECK(sample_max_distance(c, {0, 0}, DistanceMode::kMin) == Point{1, 1});

  // Equidistant ring around (5,5): the row-major first wins.
  BinaryMask ring(11, 11);
  for (Point p : {Point{5, 0}, Point{0, 5}, Point{10, 5}, Point{5, 10}, Point{8, 9}, Point{2, 1}})
    ring.set(p);
  ring.set(5, 5);
  const auto rc = build_candidates(ring, {5, 5});
  CHECK(sample_max_distance(rc, {5, 5}) == Point{5, 0});
}

TEST_CASE("argmax strategies equal the exhaustive scan on random instances") {
  SplitMix64 rng(31);
  for (int i = 0; i < 100; ++i) {
    auto [m, p0] = instance(rng, 16, 16);
    const auto img = oracle::random_gray(rng, 16, 16, 1 + static_cast<int>(rng.below(6)));
    const auto c = build_candidates(m, p0);
    const double h0 = oracle::entropy(img, p0);
    CHECK(sample_max_entropy(img, c, p0) ==
          *oracle::argmax_scan(m, p0, [&](Point q) { return oracle::entropy(img, q) - h0; }));
    CHECK(sample_max_distance(c, p0) ==
          *oracle::argmax_scan(m, p0, [&](Point q) { return dist2(q, p0); }));
  }
}

TEST_CASE("argmax does not depend on candidate enumeration order") {
  SplitMix64 rng(32);
  for (int i = 0; i < 30; ++i) {
    auto [m, p0] = instance(rng, 12, 12);
    const auto img = oracle::random_gray(rng, 12, 12, 3);
    auto c = build_candidates(m, p0);
    const Point d = sample_max_distance(c, p0);
    const Point e = sample_max_entropy(img, c, p0);
    std::reverse(c.points.begin(), c.points.end());
    CHECK(sample_max_distance(c, p0) == d);
    CHECK(sample_max_entropy(img, c, p0) == e);
  }
}

TEST_CASE("top-k examples") {
  const CandidateSet c{5, 5, {{1, 0}, {3, 0}, {0, 2}}, std::nullopt};
  TopKInputs in;
  in.candidates = &c;
  in.p0 = {0, 0};
  CHECK(sample_top_k(StrategyKind::kMaxDistance, 2, in) ==
        std::vector<Point>{{3, 0}, {0, 2}});
  try {
    sample_top_k(StrategyKind::kMaxDistance, 4, in);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInsufficientCandidates);
  }
}

TEST_CASE("top-1 reduces to the single-point operation") {
  SplitMix64 rng(40);
  for (int i = 0; i < 40; ++i) {
    auto [m, p0] = instance(rng, 14, 11);
    const auto img = oracle::random_gray(rng, 14, 11, 8);
    const auto c = build_candidates(m, p0);
    TopKInputs in{&img, &c, p0, rng.next(), DistanceMode::kMax};
    CHECK(sample_top_k(StrategyKind::kRandom, 1, in).front() == sample_random(c, in.seed));
    CHECK(sample_top_k(StrategyKind::kMaxEntropy, 1, in).front() == sample_max_entropy(img, c, p0));
    CHECK(sample_top_k(StrategyKind::kMaxDistance, 1, in).front() == sample_max_distance(c, p0));
  }
}

TEST_CASE("top-3 equals the head of the oracle ranking") {
  SplitMix64 rng(41);
  for (int i = 0; i < 60; ++i) {
    auto [m, p0] = instance(rng, 16, 16);
    if (m.count() < 4) continue;
    const auto img = oracle::random_gray(rng, 16, 16, 4);
    const auto c = build_candidates(m, p0);
    TopKInputs in{&img, &c, p0, 0, DistanceMode::kMax};
    const auto dr = ranking(m, p0, [&](Point q) { return dist2(q, p0); });
    CHECK(sample_top_k(StrategyKind::kMaxDistance, 3, in) ==
          std::vector<Point>(dr.begin(), dr.begin() + 3));
    const double h0 = oracle::entropy(img, p0);
    const auto er = ranking(m, p0, [&](Point q) { return oracle::entropy(img, q) - h0; });
    CHECK(sample_top_k(StrategyKind::kMaxEntropy, 3, in) ==
          std::vector<Point>(er.begin(), er.begin() + 3));
  }
}

TEST_CASE("random top-k draws are distinct, inside the set and prefix-stable") {
  SplitMix64 rng(42);
  for (int i = 0; i < 40; ++i) {
    auto [m, p0] = instance(rng, 10, 10);
    const auto c = build_candidates(m, p0);
    if (c.size() < 4) continue;
    TopKInputs in{nullptr, &c, p0, rng.next(), DistanceMode::kMax};
    const auto four = sample_top_k(StrategyKind::kRandom, 4, in);
    const auto two = sample_top_k(StrategyKind::kRandom, 2, in);
    CHECK(std::equal(two.begin(), two.end(), four.begin()));
    std::set<std::pair<int, int>> seen;
    for (Point p : four) {
      CHECK(m.at(p));
      CHECK_FALSE(p == p0);
      seen.insert({p.x, p.y});
    }
    CHECK(seen.size() == 4);
    CHECK(sample_top_k(StrategyKind::kRandom, 4, in) == four);
  }
}

TEST_CASE("strategy names round trip") {
  for (auto k : {StrategyKind::kRandom, StrategyKind::kMaxEntropy,
                 StrategyKind::kMaxDistance, StrategyKind::kSaliency}) {
    CHECK(parse_strategy(strategy_name(k)) == k);
  }
  CHECK_FALSE(parse_strategy("bogus").has_value());
}
