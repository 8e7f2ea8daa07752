#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "promptaug/imgcore.hpp"

namespace promptaug {

struct Sample {
  std::string id;     // <dataset>/<category?>/<stem>#<annotation_id?>
  std::string group;  // <dataset> or <dataset>/<category>
  Image image;
  BinaryMask gt_mask;
  std::optional<std::string> category;
  std::optional<std::filesystem::path> image_path;
};

struct LoadReport {
  std::size_t skipped = 0;
  std::vector<std::string> messages;

  void skip(std::string message);
};

// A deterministic, indexable list of samples. Enumeration is cheap; pixels
// are only read in load(), which is safe to call from several threads.
class Dataset {
 public:
  virtual ~Dataset() = default;

  virtual std::string name() const = 0;
  virtual std::size_t size() const = 0;
  virtual std::string sample_id(std::size_t index) const = 0;
  // Throws Error (kIoError, kEmptyMask, ...) when the sample is unusable.
  virtual Sample load(std::size_t index) const = 0;

  const LoadReport& report() const { return report_; }

 protected:
  LoadReport report_;
};

// Image/mask pairs matched by file stem, in lexicographic stem order.
class DirDataset final : public Dataset {
 public:
  DirDataset(std::string name, std::filesystem::path images_dir,
             std::filesystem::path masks_dir);

  std::string name() const override { return name_; }
  std::size_t size() const override { return pairs_.size(); }
  std::string sample_id(std::size_t index) const override;
  Sample load(std::size_t index) const override;

 private:
  struct Pair {
    std::string stem;
    std::filesystem::path image;
    std::filesystem::path mask;
  };
  std::string name_;
  std::vector<Pair> pairs_;
};

using Polygon = std::vector<double>;  // x0, y0, x1, y1, ...

struct CocoAnnotation {
  std::uint64_t id = 0;
  std::uint64_t image_id = 0;
  std::int64_t category_id = 0;
  std::variant<std::vector<Polygon>, RleMask> segmentation;
  std::array<double, 4> bbox{};
  double area = 0.0;
};

struct CocoImage {
  std::uint64_t id = 0;
  std::string file_name;
  int width = 0;
  int height = 0;
};

struct CocoIndex {
  std::map<std::uint64_t, CocoImage> images;
  std::map<std::int64_t, std::string> categories;
  std::vector<CocoAnnotation> annotations;
};

/// Parses the images / annotations / categories sections. Malformed
/// annotations are skipped into `report`; a malformed document throws.
CocoIndex parse_coco(const nlohmann::json& doc, LoadReport& report);
CocoIndex parse_coco_file(const std::filesystem::path& path, LoadReport& report);

/// Even-odd fill over pixel centers (x + 0.5, y + 0.5), polygons unioned.
BinaryMask rasterize_polygons(const std::vector<Polygon>& polygons, int width,
                              int height);

BinaryMask annotation_mask(const CocoAnnotation& ann, int width, int height);

struct CocoSelection {
  std::vector<std::string> categories;  // empty = all
  std::size_t per_category_cap = 20;    // 0 = no cap
  std::uint64_t seed = 0;
};

// Annotation indices chosen by the per-category seeded image draw, ordered
// by category id, image id, annotation id.
std::vector<std::size_t> select_coco_annotations(const CocoIndex& index,
                                                 const CocoSelection& selection);

// One sample per selected instance annotation.
class CocoDataset final : public Dataset {
 public:
  CocoDataset(std::string name, const std::filesystem::path& annotations,
              std::filesystem::path images_dir, CocoSelection selection);

  std::string name() const override { return name_; }
  std::size_t size() const override { return selected_.size(); }
  std::string sample_id(std::size_t index) const override;
  Sample load(std::size_t index) const override;

  const CocoIndex& index() const { return index_; }
  const CocoAnnotation& annotation(std::size_t index) const {
    return index_.annotations[selected_[index]];
  }

 private:
  std::string name_;
  std::filesystem::path images_dir_;
  CocoIndex index_;
  std::vector<std::size_t> selected_;
};

// Procedural benchmark: two quarter-disk objects hugging opposite image
// corners, so a single click covers roughly one of them.
class SyntheticTwoBlobDataset final : public Dataset {
 public:
  SyntheticTwoBlobDataset(std::string name, std::size_t count,
                          std::uint64_t seed);

  std::string name() const override { return name_; }
  std::size_t size() const override { return count_; }
  std::string sample_id(std::size_t index) const override;
  Sample load(std::size_t index) const override;

  static constexpr int kMinBlobRadius = 14;
  static constexpr int kMaxBlobRadius = 20;

 private:
  std::string name_;
  std::size_t count_;
  std::uint64_t seed_;
};

}  // namespace promptaug
