#include "promptaug/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "promptaug/log.hpp"
#include "promptaug/png_io.hpp"
#include "promptaug/rng.hpp"

namespace promptaug {

namespace fs = std::filesystem;
using nlohmann::json;

void LoadReport::skip(std::string message) {
  ++skipped;
  log::warn("skipped: " + message);
  messages.push_back(std::move(message));
}

namespace {

bool is_png(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png";
}

std::map<std::string, fs::path> png_files_by_stem(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::kIoError, "not a directory: " + dir.string());
  }
  std::map<std::string, fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_png(entry.path())) {
      files[entry.path().stem().string()] = entry.path();
    }
  }
  return files;
}

void check_sample(const Sample& s) {
  if (s.image.width() != s.gt_mask.width() ||
      s.image.height() != s.gt_mask.height()) {
    throw Error(ErrorCode::kDimensionMismatch,
                s.id + ": image and mask sizes differ");
  }
  if (!s.gt_mask.any()) {
    throw Error(ErrorCode::kEmptyMask, s.id + ": ground-truth mask is empty");
  }
}

}  // namespace

DirDataset::DirDataset(std::string name, fs::path images_dir, fs::path masks_dir)
    : name_(std::move(name)) {
  const auto images = png_files_by_stem(images_dir);
  const auto masks = png_files_by_stem(masks_dir);
  for (const auto& [stem, path] : images) {
    auto it = masks.find(stem);
    if (it == masks.end()) {
      report_.skip(path.string() + ": no matching mask");
      continue;
    }
    pairs_.push_back({stem, path, it->second});
  }
  for (const auto& [stem, path] : masks) {
    if (!images.count(stem)) report_.skip(path.string() + ": no matching image");
  }
}

std::string DirDataset::sample_id(std::size_t index) const {
  return name_ + "/" + pairs_.at(index).stem;
}

Sample DirDataset::load(std::size_t index) const {
  const Pair& pair = pairs_.at(index);
  Sample s;
  s.id = sample_id(index);
  s.group = name_;
  s.image = read_png(pair.image);
  s.gt_mask = read_mask_png(pair.mask);
  s.image_path = pair.image;
  check_sample(s);
  return s;
}

BinaryMask rasterize_polygons(const std::vector<Polygon>& polygons, int width,
                              int height) {
  BinaryMask out(width, height);
  std::vector<double> crossings;
  for (const Polygon& poly : polygons) {
    const std::size_t n = poly.size() / 2;
    if (n < 3) continue;
    for (int y = 0; y < height; ++y) {
      const double yc = y + 0.5;
      crossings.clear();
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1) % n;
        double xa = poly[2 * i], ya = poly[2 * i + 1];
        double xb = poly[2 * j], yb = poly[2 * j + 1];
        if ((ya > yc) == (yb > yc)) continue;
        if (ya > yb) {
          std::swap(xa, xb);
          std::swap(ya, yb);
        }
        crossings.push_back(xa + (xb - xa) * (yc - ya) / (yb - ya));
      }
      std::sort(crossings.begin(), crossings.end());
      for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
        // Centers in [left, right).
        const double left = crossings[k];
        const double right = crossings[k + 1];
        int x = std::max(0, static_cast<int>(std::floor(left - 0.5)));
        for (; x < width && x + 0.5 < right; ++x) {
          if (x + 0.5 >= left) out.set(x, y);
        }
      }
    }
  }
  return out;
}

BinaryMask annotation_mask(const CocoAnnotation& ann, int width, int height) {
  if (const auto* polys = std::get_if<std::vector<Polygon>>(&ann.segmentation)) {
    return rasterize_polygons(*polys, width, height);
  }
  const auto& rle = std::get<RleMask>(ann.segmentation);
  if (rle.width != width || rle.height != height) {
    throw Error(ErrorCode::kDimensionMismatch,
                "annotation " + std::to_string(ann.id) +
                    ": RLE size differs from image");
  }
  return rle_decode(rle);
}

namespace {

CocoAnnotation parse_annotation(const json& a) {
  CocoAnnotation ann;
  ann.id = a.at("id").get<std::uint64_t>();
  ann.image_id = a.at("image_id").get<std::uint64_t>();
  ann.category_id = a.at("category_id").get<std::int64_t>();
  if (a.contains("bbox") && a["bbox"].is_array() && a["bbox"].size() == 4) {
    for (int i = 0; i < 4; ++i) ann.bbox[i] = a["bbox"][i].get<double>();
  }
  if (a.contains("area") && a["area"].is_number()) {
    ann.area = a["area"].get<double>();
  }
  const json& seg = a.at("segmentation");
  if (seg.is_array()) {
    std::vector<Polygon> polys;
    for (const auto& p : seg) {
      auto poly = p.get<Polygon>();
      if (poly.size() < 6 || poly.size() % 2 != 0) {
        throw Error(ErrorCode::kParseError,
                    "polygon needs an even number (>= 6) of coordinates");
      }
      polys.push_back(std::move(poly));
    }
    if (polys.empty()) throw Error(ErrorCode::kParseError, "no polygons");
    ann.segmentation = std::move(polys);
  } else if (seg.is_object()) {
    if (seg.contains("counts") && seg["counts"].is_string()) {
      throw Error(ErrorCode::kParseError, "compressed RLE is not supported");
    }
    RleMask rle;
    const auto size = seg.at("size").get<std::vector<int>>();
    if (size.size() != 2) throw Error(ErrorCode::kParseError, "RLE size must be [h, w]");
    rle.height = size[0];
    rle.width = size[1];
    rle.counts = seg.at("counts").get<std::vector<std::uint32_t>>();
    std::uint64_t total = 0;
    for (auto c : rle.counts) total += c;
    if (total != static_cast<std::uint64_t>(rle.width) * rle.height) {
      throw Error(ErrorCode::kParseError, "RLE counts do not sum to h*w");
    }
    ann.segmentation = std::move(rle);
  } else {
    throw Error(ErrorCode::kParseError, "unrecognized segmentation");
  }
  return ann;
}

}  // namespace

CocoIndex parse_coco(const json& doc, LoadReport& report) {
  if (!doc.is_object() || !doc.contains("images") ||
      !doc.contains("annotations") || !doc.contains("categories")) {
    throw Error(ErrorCode::kParseError,
                "COCO document needs images, annotations and categories");
  }
  CocoIndex index;
  try {
    for (const auto& im : doc["images"]) {
      CocoImage image;
      image.id = im.at("id").get<std::uint64_t>();
      image.file_name = im.at("file_name").get<std::string>();
      image.width = im.at("width").get<int>();
      image.height = im.at("height").get<int>();
      index.images[image.id] = image;
    }
    for (const auto& c : doc["categories"]) {
      index.categories[c.at("id").get<std::int64_t>()] =
          c.at("name").get<std::string>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("COCO: ") + e.what());
  }
  for (const auto& a : doc["annotations"]) {
    const std::string where =
        "annotation " + (a.is_object() && a.contains("id") ? a["id"].dump() : "?");
    try {
      if (a.is_object() && a.value("iscrowd", 0) != 0) {
        report.skip(where + ": crowd annotation");
        continue;
      }
      CocoAnnotation ann = parse_annotation(a);
      if (!index.images.count(ann.image_id)) {
        report.skip(where + ": unknown image_id");
        continue;
      }
      if (!index.categories.count(ann.category_id)) {
        report.skip(where + ": unknown category_id");
        continue;
      }
      index.annotations.push_back(std::move(ann));
    } catch (const json::exception& e) {
      report.skip(where + ": " + e.what());
    } catch (const Error& e) {
      report.skip(where + ": " + e.what());
    }
  }
  return index;
}

CocoIndex parse_coco_file(const fs::path& path, LoadReport& report) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
  return parse_coco(doc, report);
}

std::vector<std::size_t> select_coco_annotations(const CocoIndex& index,
                                                 const CocoSelection& selection) {
  const std::set<std::string> wanted(selection.categories.begin(),
                                     selection.categories.end());
  std::vector<std::size_t> out;
  for (const auto& [cat_id, cat_name] : index.categories) {
    if (!wanted.empty() && !wanted.count(cat_name)) continue;
    std::vector<std::uint64_t> image_ids;
    for (const auto& ann : index.annotations) {
      if (ann.category_id == cat_id) image_ids.push_back(ann.image_id);
    }
    std::sort(image_ids.begin(), image_ids.end());
    image_ids.erase(std::unique(image_ids.begin(), image_ids.end()),
                    image_ids.end());
    if (selection.per_category_cap > 0 &&
        image_ids.size() > selection.per_category_cap) {
      SplitMix64 rng(derive_seed(selection.seed, {fnv1a(cat_name)}));
      for (std::size_t i = 0; i < selection.per_category_cap; ++i) {
        std::swap(image_ids[i], image_ids[i + rng.below(image_ids.size() - i)]);
      }
      image_ids.resize(selection.per_category_cap);
      std::sort(image_ids.begin(), image_ids.end());
    }
    std::vector<std::size_t> chosen;
    for (std::size_t i = 0; i < index.annotations.size(); ++i) {
      const auto& ann = index.annotations[i];
      if (ann.category_id == cat_id &&
          std::binary_search(image_ids.begin(), image_ids.end(), ann.image_id)) {
        chosen.push_back(i);
      }
    }
    std::sort(chosen.begin(), chosen.end(), [&](std::size_t a, std::size_t b) {
      const auto& x = index.annotations[a];
      const auto& y = index.annotations[b];
      return x.image_id != y.image_id ? x.image_id < y.image_id : x.id < y.id;
    });
    out.insert(out.end(), chosen.begin(), chosen.end());
  }
  return out;
}

CocoDataset::CocoDataset(std::string name, const fs::path& annotations,
                         fs::path images_dir, CocoSelection selection)
    : name_(std::move(name)), images_dir_(std::move(images_dir)) {
  index_ = parse_coco_file(annotations, report_);
  selected_ = select_coco_annotations(index_, selection);
}

std::string CocoDataset::sample_id(std::size_t index) const {
  const auto& ann = annotation(index);
  const auto& image = index_.images.at(ann.image_id);
  return name_ + "/" + index_.categories.at(ann.category_id) + "/" +
         fs::path(image.file_name).stem().string() + "#" + std::to_string(ann.id);
}

Sample CocoDataset::load(std::size_t index) const {
  const auto& ann = annotation(index);
  const auto& meta = index_.images.at(ann.image_id);
  Sample s;
  s.id = sample_id(index);
  s.category = index_.categories.at(ann.category_id);
  s.group = name_ + "/" + *s.category;
  s.image_path = images_dir_ / meta.file_name;
  s.image = read_png(*s.image_path);
  if (s.image.width() != meta.width || s.image.height() != meta.height) {
    throw Error(ErrorCode::kDimensionMismatch,
                s.id + ": image file size differs from annotation metadata");
  }
  s.gt_mask = annotation_mask(ann, meta.width, meta.height);
  check_sample(s);
  return s;
}

SyntheticTwoBlobDataset::SyntheticTwoBlobDataset(std::string name,
                                                 std::size_t count,
                                                 std::uint64_t seed)
    : name_(std::move(name)), count_(count), seed_(seed) {}

std::string SyntheticTwoBlobDataset::sample_id(std::size_t index) const {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%05zu", index);
  return name_ + "/" + buf;
}

Sample SyntheticTwoBlobDataset::load(std::size_t index) const {
  if (index >= count_) throw Error(ErrorCode::kInvalidArgument, "index out of range");
  SplitMix64 rng(derive_seed(seed_, {static_cast<std::uint64_t>(index)}));
  const int width = 56 + static_cast<int>(rng.below(17));
  const int height = 56 + static_cast<int>(rng.below(17));
  const int span = kMaxBlobRadius - kMinBlobRadius + 1;
  const long r1 = kMinBlobRadius + static_cast<long>(rng.below(span));
  const long r2 = kMinBlobRadius + static_cast<long>(rng.below(span));

  Sample s;
  s.id = sample_id(index);
  s.group = name_;
  s.image = Image(width, height, 3);
  s.gt_mask = BinaryMask(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const long dx2 = width - 1 - x, dy2 = height - 1 - y;
      const bool in1 = static_cast<long>(x) * x + static_cast<long>(y) * y <= r1 * r1;
      const bool in2 = dx2 * dx2 + dy2 * dy2 <= r2 * r2;
      int rgb[3];
      if (in1) {
        // Textured object.
        const int n = static_cast<int>(rng.below(40));
        rgb[0] = 180 + n; rgb[1] = 110 + n; rgb[2] = 60 + n / 2;
      } else if (in2) {
        const int n = static_cast<int>(rng.below(8));
        rgb[0] = 90 + n; rgb[1] = 170 + n; rgb[2] = 215 + n;
      } else {
        const int n = static_cast<int>(rng.below(12));
        rgb[0] = 30 + n; rgb[1] = 36 + n; rgb[2] = 44 + n;
      }
      for (int c = 0; c < 3; ++c) s.image.at(x, y, c) = static_cast<std::uint8_t>(rgb[c]);
      if (in1 || in2) s.gt_mask.set(x, y);
    }
  }
  return s;
}

}  // namespace promptaug
