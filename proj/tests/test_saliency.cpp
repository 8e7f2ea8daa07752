#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include "oracles.hpp"
#include "promptaug/fft.hpp"
#include "promptaug/saliency.hpp"

using namespace promptaug;

namespace {

// Returns whatever map it was built with, ignoring the image.
class FixedSource final : public SaliencySource {
 public:
  explicit FixedSource(std::function<double(int, int)> f) : f_(std::move(f)) {}
  SaliencyMap compute(const Image& img) override {
    std::vector<double> v;
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) v.push_back(f_(x, y));
    return normalize_saliency(img.width(), img.height(), std::move(v));
  }
  std::string name() const override { return "fixed"; }

 private:
  std::function<double(int, int)> f_;
};

BinaryMask rect_mask(int w, int h, Box b) { return fill_box(w, h, b); }

Point argmax(const SaliencyMap& m) {
  const auto it = std::max_element(m.values.begin(), m.values.end());
  const int i = static_cast<int>(it - m.values.begin());
  return {i % m.width, i / m.width};
}

}  // namespace

TEST_CASE("fft matches the naive dft") {
  SplitMix64 rng(1);
  for (std::size_t n : {1u, 2u, 4u, 8u, 64u}) {
    std::vector<std::complex<double>> in(n);
    for (auto& c : in) c = {double(rng.below(100)) - 50, double(rng.below(100)) - 50};
    for (bool inverse : {false, true}) {
      auto got = in;
      fft::transform(got, inverse);
      const auto want = oracle::dft(in, inverse);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(std::abs(got[i] - want[i]) < 1e-9);
      }
    }
  }
}

TEST_CASE("fft round trip and size check") {
  SplitMix64 rng(2);
  std::vector<std::complex<double>> grid(16 * 8);
  for (auto& c : grid) c = double(rng.below(256));
  auto copy = grid;
  fft::transform_2d(copy, 16, 8, false);
  fft::transform_2d(copy, 16, 8, true);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(std::abs(copy[i] - grid[i]) < 1e-9);
  std::vector<std::complex<double>> bad(6);
  CHECK_THROWS_AS(fft::transform(bad, false), Error);
}

TEST_CASE("crop_with_margin arithmetic and clamps") {
  const Image img(100, 100, 1);
  const auto r = crop_with_margin(img, rect_mask(100, 100, {20, 20, 30, 30}));
  CHECK(r.box == Box{10, 10, 40, 40});
  CHECK(r.image.width() == 31);
  CHECK(r.image.height() == 31);
  const auto corner = crop_with_margin(img, rect_mask(100, 100, {0, 0, 5, 3}));
  CHECK(corner.box == Box{0, 0, 15, 13});
  const auto far = crop_with_margin(img, rect_mask(100, 100, {95, 92, 99, 99}));
  CHECK(far.box == Box{85, 82, 99, 99});
  try {
    crop_with_margin(img, BinaryMask(100, 100));
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptyMask);
  }
}

TEST_CASE("crop box contains the mask bbox with margin exactly 10 unless clamped") {
  SplitMix64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const int w = 10 + static_cast<int>(rng.below(70));
    const int h = 10 + static_cast<int>(rng.below(70));
    const auto m = oracle::random_blob(rng, w, h);
    const auto bb = *tight_bbox(m);
    const auto crop = crop_with_margin(Image(w, h, 1), m).box;
    CHECK(crop.contains(bb));
    CHECK((crop.x_min == 0 || bb.x_min - crop.x_min == 10));
    CHECK((crop.y_min == 0 || bb.y_min - crop.y_min == 10));
    CHECK((crop.x_max == w - 1 || crop.x_max - bb.x_max == 10));
    CHECK((crop.y_max == h - 1 || crop.y_max - bb.y_max == 10));
  }
}

TEST_CASE("spectral residual: constant image gives a zero map") {
  const Image flat(40, 30, 1, std::vector<std::uint8_t>(1200, 90));
  const auto m = spectral_residual_saliency(flat);
  CHECK(m.width == 40);
  CHECK(m.height == 30);
  for (double v : m.values) CHECK(v == 0.0);
}

TEST_CASE("spectral residual: bright dot peaks within 3 px") {
  for (Point dot : {Point{32, 32}, Point{20, 41}, Point{50, 12}}) {
    Image img(64, 64, 1);
    img.at(dot.x, dot.y) = 255;
    const Point peak = argmax(spectral_residual_saliency(img));
    CHECK(std::max(std::abs(peak.x - dot.x), std::abs(peak.y - dot.y)) <= 3);
  }
}

TEST_CASE("spectral residual values are finite, in [0,1], max 1") {
  SplitMix64 rng(5);
  for (int i = 0; i < 10; ++i) {
    const int w = 8 + static_cast<int>(rng.below(90));
    const int h = 8 + static_cast<int>(rng.below(90));
    const auto img = oracle::random_gray(rng, w, h, 2 + static_cast<int>(rng.below(255)));
    const auto m = spectral_residual_saliency(img);
    REQUIRE(m.values.size() == static_cast<std::size_t>(w) * h);
    double hi = 0.0;
    for (double v : m.values) {
      CHECK(std::isfinite(v));
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      hi = std::max(hi, v);
    }
    CHECK(hi == 1.0);
  }
}

TEST_CASE("normalize_saliency guards flat and non-finite input") {
  CHECK(normalize_saliency(2, 1, {3.0, 3.0}).values == std::vector<double>{0.0, 0.0});
  CHECK(normalize_saliency(2, 1, {NAN, 1.0}).values == std::vector<double>{0.0, 0.0});
  CHECK(normalize_saliency(3, 1, {2.0, 4.0, 3.0}).values ==
        std::vector<double>{0.0, 1.0, 0.5});
}

TEST_CASE("otsu on a bimodal map separates the halves") {
  SaliencyMap m{10, 10, {}};
  for (int i = 0; i < 100; ++i) m.values.push_back(i < 50 ? 0.1 : 0.9);
  const auto b = binarize_saliency(m);
  for (int i = 0; i < 100; ++i) CHECK(b.at(i % 10, i / 10) == (i >= 50));
}

TEST_CASE("otsu threshold matches the brute-force oracle") {
  SplitMix64 rng(7);
  for (int i = 0; i < 200; ++i) {
    SaliencyMap m{12, 9, {}};
    const int modes = 1 + static_cast<int>(rng.below(4));
    for (int j = 0; j < 108; ++j) {
      const double centre = (1 + static_cast<int>(rng.below(modes))) / double(modes + 1);
      m.values.push_back(std::clamp(centre + (double(rng.below(200)) - 100) / 1000.0, 0.0, 1.0));
    }
    std::vector<int> bins;
    for (double v : m.values) bins.push_back(saliency_bin(v));
    CHECK(otsu_threshold(m) == oracle::otsu(bins));
  }
}

TEST_CASE("saliency_bin edges") {
  CHECK(saliency_bin(0.0) == 0);
  CHECK(saliency_bin(1.0) == 255);
  CHECK(saliency_bin(0.5) == 128);
  CHECK(saliency_bin(-1.0) == 0);
}

TEST_CASE("binarize: zero map stays empty, one-pixel map keeps the pixel") {
  SaliencyMap zero{8, 8, std::vector<double>(64, 0.0)};
  CHECK_FALSE(binarize_saliency(zero).any());
  SaliencyMap one{8, 8, std::vector<double>(64, 0.0)};
  one.values[9] = 1.0;
  const auto b = binarize_saliency(one);
  CHECK(b.count() == 1);
  CHECK(b.at(1, 1));
}

TEST_CASE("saliency equal to the initial mask samples inside it") {
  const int w = 60, h = 50;
  const auto initial = rect_mask(w, h, {20, 15, 35, 30});
  const CropRegion crop = crop_with_margin(Image(w, h, 1), initial);
  FixedSource source([&](int x, int y) {
    return initial.at(x + crop.box.x_min, y + crop.box.y_min) ? 1.0 : 0.0;
  });
  const Image img(w, h, 1);
  for (std::uint64_t s = 0; s < 200; ++s) {
    CHECK(initial.at(sample_saliency_point(img, initial, s, source)));
  }
}

TEST_CASE("a salient region beyond the mask yields points outside it") {
  const int w = 60, h = 50;
  const auto initial = rect_mask(w, h, {20, 15, 30, 25});
  // Salient lesion spills 6 px past the mask on the right.
  const auto lesion = rect_mask(w, h, {25, 15, 36, 25});
  const CropRegion crop = crop_with_margin(Image(w, h, 1), initial);
  FixedSource source([&](int x, int y) {
    return lesion.at(x + crop.box.x_min, y + crop.box.y_min) ? 1.0 : 0.0;
  });
  int outside = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const Point p = sample_saliency_point(Image(w, h, 1), initial, s, source);
    CHECK(lesion.at(p));
    outside += !initial.at(p);
  }
  CHECK(outside > 0);
}

TEST_CASE("saliency candidates: coordinates map back and p0 is excluded") {
  const int w = 70, h = 60;
  const auto initial = rect_mask(w, h, {30, 30, 40, 40});
  const CropRegion crop = crop_with_margin(Image(w, h, 1), initial);
  const Point spot{33, 37};
  FixedSource source([&](int x, int y) {
    return (x + crop.box.x_min == spot.x && y + crop.box.y_min == spot.y) ? 1.0 : 0.0;
  });
  const auto c = saliency_candidates(Image(w, h, 1), initial, source);
  REQUIRE(c.size() == 1);
  CHECK(c.points.front() == spot);
  // Back into crop coordinates and out again.
  const Point local{spot.x - crop.box.x_min, spot.y - crop.box.y_min};
  CHECK(Point{local.x + crop.box.x_min, local.y + crop.box.y_min} == spot);
  try {
    saliency_candidates(Image(w, h, 1), initial, source, spot);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSaliencyEmpty);
  }
}

TEST_CASE("constant provider map means SaliencyEmpty") {
  FixedSource source([](int, int) { return 0.7; });
  const int w = 40, h = 40;
  try {
    sample_saliency_point(Image(w, h, 1), rect_mask(w, h, {10, 10, 20, 20}), 1, source);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSaliencyEmpty);
  }
}

TEST_CASE("in-tree pipeline is deterministic per seed") {
  SplitMix64 rng(9);
  Image img(80, 64, 1);
  for (auto& v : img.pixels()) v = static_cast<std::uint8_t>(20 + rng.below(10));
  for (int y = 30; y < 40; ++y)
    for (int x = 44; x < 52; ++x) img.at(x, y) = 240;
  const auto initial = rect_mask(80, 64, {35, 25, 50, 42});
  SpectralResidualSource a, b;
  for (std::uint64_t s = 0; s < 20; ++s) {
    CHECK(sample_saliency_point(img, initial, s, a) ==
          sample_saliency_point(img, initial, s, b));
  }
}

TEST_CASE("resize_bilinear is identity at equal size and preserves constants") {
  std::vector<double> v{1, 2, 3, 4, 5, 6};
  CHECK(resize_bilinear(v, 3, 2, 3, 2) == v);
  for (double x : resize_bilinear(std::vector<double>(12, 0.5), 4, 3, 9, 7)) {
    CHECK(x == doctest::Approx(0.5));
  }
}
