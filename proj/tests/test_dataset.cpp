#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "promptaug/dataset.hpp"
#include "promptaug/png_io.hpp"

using namespace promptaug;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kPairs = fs::path(PROMPTAUG_TEST_DATA) / "pairs";

BinaryMask pnpoly_mask(const std::vector<Polygon>& polys, int w, int h) {
  BinaryMask m(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (const auto& p : polys)
        if (oracle::pnpoly(p, x + 0.5, y + 0.5)) m.set(x, y);
  return m;
}

// Star-shaped, hence simple: sorted angles with random radii.
Polygon random_polygon(SplitMix64& rng, int w, int h) {
  const int n = 3 + static_cast<int>(rng.below(10));
  const double cx = 4 + double(rng.below(static_cast<std::uint64_t>(w - 8) * 8)) / 8;
  const double cy = 4 + double(rng.below(static_cast<std::uint64_t>(h - 8) * 8)) / 8;
  std::vector<double> angles;
  for (int i = 0; i < n; ++i) angles.push_back(double(rng.below(1u << 20)) / (1u << 20) * 2 * std::numbers::pi);
  std::sort(angles.begin(), angles.end());
  Polygon p;
  for (double a : angles) {
    const double r = 1.0 + double(rng.below(1u << 16)) / (1u << 16) * std::min(w, h) / 2.0;
    p.push_back(cx + r * std::cos(a));
    p.push_back(cy + r * std::sin(a));
  }
  return p;
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() /
                   ("promptaug_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

json coco_doc() {
  json doc;
  doc["images"] = json::array();
  for (int i = 1; i <= 5; ++i) {
    doc["images"].push_back({{"id", i}, {"file_name", "img" + std::to_string(i) + ".png"},
                             {"width", 8}, {"height", 6}});
  }
  doc["categories"] = {{{"id", 2}, {"name", "dog"}}, {{"id", 1}, {"name", "cat"}}};
  doc["annotations"] = json::array();
  std::uint64_t id = 100;
  for (int i = 1; i <= 5; ++i) {
    doc["annotations"].push_back({{"id", id++}, {"image_id", i}, {"category_id", 1},
                                  {"segmentation", {{1, 1, 5, 1, 5, 4, 1, 4}}},
                                  {"bbox", {1, 1, 4, 3}}, {"area", 12}, {"iscrowd", 0}});
  }
  // Two dogs in image 2: one polygon, one RLE.
  doc["annotations"].push_back({{"id", 200}, {"image_id", 2}, {"category_id", 2},
                                {"segmentation", {{0, 0, 3, 0, 0, 3}}}});
  doc["annotations"].push_back({{"id", 201}, {"image_id", 2}, {"category_id", 2},
                                {"segmentation", {{"size", {6, 8}}, {"counts", {42, 6}}}}});
  return doc;
}

void write_coco(const fs::path& dir, const json& doc) {
  std::ofstream(dir / "ann.json") << doc.dump();
  fs::create_directories(dir / "images");
  for (const auto& im : doc["images"]) {
    Image img(im["width"].get<int>(), im["height"].get<int>(), 1);
    for (auto& v : img.pixels()) v = 60;
    write_png(dir / "images" / im["file_name"].get<std::string>(), img);
  }
}

}  // namespace

TEST_CASE("dir dataset pairs by stem in lexicographic order") {
  DirDataset ds("pairs", kPairs / "images", kPairs / "masks");
  REQUIRE(ds.size() == 3);
  CHECK(ds.sample_id(0) == "pairs/a");
  CHECK(ds.sample_id(1) == "pairs/b");
  CHECK(ds.sample_id(2) == "pairs/c");
  CHECK(ds.report().skipped == 2);  // d.png has no mask, e.png no image
}

TEST_CASE("dir dataset golden pixels") {
  DirDataset ds("pairs", kPairs / "images", kPairs / "masks");
  const Sample a = ds.load(0);
  CHECK(a.group == "pairs");
  CHECK(a.image.channels() == 1);
  CHECK(a.image.at(3, 2) == 11);
  const BinaryMask want(4, 3, std::vector<std::uint8_t>{0, 1, 0, 0, 1, 1, 0, 0, 0, 0, 0, 1});
  CHECK(a.gt_mask == want);
  const Sample b = ds.load(1);
  CHECK(b.image.channels() == 3);
  CHECK(b.image.at(2, 1, 0) == 20);
  CHECK(b.image.at(2, 1, 1) == 20);
  CHECK(b.image.at(2, 1, 2) == 7);
  CHECK(b.gt_mask.count() == 3);
  CHECK(ds.load(2).gt_mask == fill_box(5, 2, {3, 0, 4, 1}));
}

TEST_CASE("dir dataset rejects empty GT and size mismatches at load") {
  const auto dir = scratch_dir("dir");
  fs::create_directories(dir / "i");
  fs::create_directories(dir / "m");
  write_png(dir / "i" / "empty.png", Image(3, 3, 1));
  write_png(dir / "m" / "empty.png", Image(3, 3, 1));
  write_png(dir / "i" / "size.png", Image(3, 3, 1));
  write_png(dir / "m" / "size.png", mask_to_image(BinaryMask(4, 3, true)));
  DirDataset ds("x", dir / "i", dir / "m");
  REQUIRE(ds.size() == 2);
  auto code = [&](std::size_t i) {
    try {
      ds.load(i);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInvalidArgument;
  };
  CHECK(code(0) == ErrorCode::kEmptyMask);
  CHECK(code(1) == ErrorCode::kDimensionMismatch);
  CHECK_THROWS_AS(DirDataset("x", dir / "nope", dir / "m"), Error);
  fs::remove_all(dir);
}

TEST_CASE("triangle rasterization matches the crossing oracle") {
  const std::vector<Polygon> tri{{0, 0, 4, 0, 0, 4}};
  const auto m = rasterize_polygons(tri, 5, 5);
  CHECK(m == pnpoly_mask(tri, 5, 5));
  // Centers strictly below the hypotenuse x + y = 4.
  CHECK(m.count() == 6);
}

TEST_CASE("polygon rasterization equals the oracle on random simple polygons") {
  SplitMix64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const int w = 10 + static_cast<int>(rng.below(40));
    const int h = 10 + static_cast<int>(rng.below(40));
    std::vector<Polygon> polys{random_polygon(rng, w, h)};
    if (rng.below(3) == 0) polys.push_back(random_polygon(rng, w, h));
    CHECK(rasterize_polygons(polys, w, h) == pnpoly_mask(polys, w, h));
  }
}

TEST_CASE("polygons past the image edge are clipped") {
  const std::vector<Polygon> big{{-5, -5, 20, -5, 20, 20, -5, 20}};
  CHECK(rasterize_polygons(big, 6, 4).count() == 24);
}

TEST_CASE("coco parse, skips and RLE decode") {
  json doc = coco_doc();
  doc["annotations"].push_back({{"id", 300}, {"image_id", 1}, {"category_id", 1},
                                {"segmentation", {{"size", {6, 8}}, {"counts", "abc"}}}});
  doc["annotations"].push_back({{"id", 301}, {"image_id", 1}, {"category_id", 1},
                                {"iscrowd", 1}, {"segmentation", {{"size", {6, 8}}, {"counts", {48}}}}});
  doc["annotations"].push_back({{"id", 302}, {"image_id", 99}, {"category_id", 1},
                                {"segmentation", {{0, 0, 1, 0, 1, 1}}}});
  doc["annotations"].push_back({{"id", 303}, {"image_id", 1}, {"category_id", 1},
                                {"segmentation", {{0, 0, 1, 0}}}});
  doc["annotations"].push_back({{"id", 304}, {"image_id", 1}, {"category_id", 1},
                                {"segmentation", {{"size", {6, 8}}, {"counts", {40}}}}});
  LoadReport report;
  const auto index = parse_coco(doc, report);
  CHECK(index.annotations.size() == 7);
  CHECK(report.skipped == 5);
  const auto& rle_ann = index.annotations.back();
  CHECK(rle_ann.id == 201);
  const auto m = annotation_mask(rle_ann, 8, 6);
  CHECK(m == rle_decode(std::get<RleMask>(rle_ann.segmentation)));
  // 42 zeros in column-major order fill columns 0..6, then 6 ones in column 7.
  CHECK(m == fill_box(8, 6, {7, 0, 7, 5}));
  CHECK_THROWS_AS(annotation_mask(rle_ann, 6, 8), Error);
}

TEST_CASE("coco documents missing a section are a hard error") {
  LoadReport report;
  for (const char* key : {"images", "annotations", "categories"}) {
    json doc = coco_doc();
    doc.erase(key);
    try {
      parse_coco(doc, report);
      FAIL("no throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kParseError);
    }
  }
  const auto dir = scratch_dir("badjson");
  std::ofstream(dir / "bad.json") << "{ not json";
  CHECK_THROWS_AS(parse_coco_file(dir / "bad.json", report), Error);
  fs::remove_all(dir);
}

TEST_CASE("coco rle agrees with imgcore on random masks") {
  SplitMix64 rng(6);
  for (int i = 0; i < 100; ++i) {
    const int w = 1 + static_cast<int>(rng.below(30));
    const int h = 1 + static_cast<int>(rng.below(30));
    const auto mask = oracle::random_mask(rng, w, h, 40);
    const auto rle = rle_encode(mask);
    json doc = coco_doc();
    doc["images"] = {{{"id", 1}, {"file_name", "x.png"}, {"width", w}, {"height", h}}};
    doc["annotations"] = {{{"id", 1}, {"image_id", 1}, {"category_id", 1},
                           {"segmentation", {{"size", {h, w}}, {"counts", rle.counts}}}}};
    LoadReport report;
    const auto index = parse_coco(doc, report);
    REQUIRE(index.annotations.size() == 1);
    CHECK(annotation_mask(index.annotations[0], w, h) == mask);
  }
}

TEST_CASE("coco selection: seeded cap, stable and ordered") {
  LoadReport report;
  const auto index = parse_coco(coco_doc(), report);
  CocoSelection sel;
  sel.categories = {"cat"};
  sel.per_category_cap = 2;
  sel.seed = 42;
  const auto a = select_coco_annotations(index, sel);
  CHECK(a.size() == 2);
  CHECK(a == select_coco_annotations(index, sel));
  CHECK(index.annotations[a[0]].image_id < index.annotations[a[1]].image_id);
  // Different seeds eventually pick different images.
  bool differs = false;
  for (std::uint64_t s = 0; s < 20 && !differs; ++s) {
    sel.seed = s;
    differs = select_coco_annotations(index, sel) != a;
  }
  CHECK(differs);

  sel.categories.clear();
  sel.per_category_cap = 0;
  const auto all = select_coco_annotations(index, sel);
  REQUIRE(all.size() == 7);
  // Category id order (cat=1 before dog=2), then image id, then annotation id.
  CHECK(index.annotations[all[5]].id == 200);
  CHECK(index.annotations[all[6]].id == 201);
}

TEST_CASE("coco dataset samples") {
  const auto dir = scratch_dir("coco");
  write_coco(dir, coco_doc());
  CocoDataset ds("coco", dir / "ann.json", dir / "images", CocoSelection{{"dog"}, 20, 0});
  REQUIRE(ds.size() == 2);
  CHECK(ds.sample_id(0) == "coco/dog/img2#200");
  const Sample s = ds.load(1);
  CHECK(s.id == "coco/dog/img2#201");
  CHECK(s.group == "coco/dog");
  CHECK(s.category == "dog");
  CHECK(s.gt_mask.count() == 6);
  CHECK(s.image_path == dir / "images" / "img2.png");

  // Metadata that disagrees with the file is rejected at load.
  json doc = coco_doc();
  doc["images"][1]["width"] = 9;
  write_coco(dir, coco_doc());
  std::ofstream(dir / "ann.json") << doc.dump();
  CocoDataset bad("coco", dir / "ann.json", dir / "images", CocoSelection{{"dog"}, 20, 0});
  CHECK_THROWS_AS(bad.load(0), Error);
  fs::remove_all(dir);
}

TEST_CASE("synthetic two-blob samples") {
  SyntheticTwoBlobDataset ds("two_blob", 20, 7);
  CHECK(ds.size() == 20);
  CHECK(ds.sample_id(3) == "two_blob/00003");
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const Sample s = ds.load(i);
    CHECK(s.gt_mask.at(0, 0));
    CHECK(s.gt_mask.at(s.gt_mask.width() - 1, s.gt_mask.height() - 1));
    CHECK_FALSE(s.gt_mask.at(s.gt_mask.width() / 2, s.gt_mask.height() / 2));
    CHECK(s.image == ds.load(i).image);
  }
  SyntheticTwoBlobDataset other("two_blob", 20, 8);
  CHECK_FALSE(other.load(0).image == ds.load(0).image);
  CHECK_THROWS_AS(ds.load(20), Error);
}
