#include "promptaug/protocol.hpp"

#include <algorithm>
#include <cmath>

namespace promptaug::protocol {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& what) {
  throw Error(ErrorCode::kProtocolError, what);
}

void put_image(ordered_json& j, const ImageSource& image) {
  if (image.png_base64) {
    j["image_png_b64"] = *image.png_base64;
  } else {
    j["image_path"] = image.path.value_or("");
  }
}

ImageSource get_image(const json& j) {
  ImageSource image;
  if (j.contains("image_path") && j["image_path"].is_string()) {
    image.path = j["image_path"].get<std::string>();
  }
  if (j.contains("image_png_b64") && j["image_png_b64"].is_string()) {
    image.png_base64 = j["image_png_b64"].get<std::string>();
  }
  if (!image.path && !image.png_base64) fail("request has no image");
  return image;
}

std::uint64_t get_id(const json& j) {
  if (!j.contains("id") || !j["id"].is_number_unsigned()) {
    fail("missing or non-integer id");
  }
  return j["id"].get<std::uint64_t>();
}

template <typename T>
T get_field(const json& j, const char* key) {
  if (!j.contains(key)) fail(std::string("missing field '") + key + "'");
  try {
    return j[key].get<T>();
  } catch (const json::exception&) {
    fail(std::string("bad field '") + key + "'");
  }
}

struct Encoder {
  ordered_json operator()(const Hello& m) const {
    ordered_json j;
    j["kind"] = "hello";
    j["version"] = m.version;
    j["model"] = m.model;
    return j;
  }
  ordered_json operator()(const SegmentRequest& m) const {
    ordered_json j;
    j["kind"] = "segment";
    j["id"] = m.id;
    put_image(j, m.image);
    ordered_json points = ordered_json::array();
    ordered_json labels = ordered_json::array();
    for (const auto& p : m.points) {
      points.push_back({p.point.x, p.point.y});
      labels.push_back(static_cast<int>(p.label));
    }
    j["points"] = std::move(points);
    j["labels"] = std::move(labels);
    if (m.box) {
      j["box"] = {m.box->x_min, m.box->y_min, m.box->x_max, m.box->y_max};
    } else {
      j["box"] = nullptr;
    }
    j["multimask"] = m.multimask;
    return j;
  }
  ordered_json operator()(const SaliencyRequest& m) const {
    ordered_json j;
    j["kind"] = "saliency";
    j["id"] = m.id;
    put_image(j, m.image);
    return j;
  }
  ordered_json operator()(const SegmentResponse& m) const {
    ordered_json j;
    j["kind"] = "result";
    j["id"] = m.id;
    j["mask_rle"] = rle_to_json(m.mask);
    j["score"] = m.score;
    return j;
  }
  ordered_json operator()(const SaliencyResponse& m) const {
    ordered_json j;
    j["kind"] = "saliency_result";
    j["id"] = m.id;
    j["size"] = {m.height, m.width};
    j["values"] = m.values;
    return j;
  }
  ordered_json operator()(const ErrorResponse& m) const {
    ordered_json j;
    j["kind"] = "error";
    if (m.id) {
      j["id"] = *m.id;
    } else {
      j["id"] = nullptr;
    }
    j["message"] = m.message;
    return j;
  }
};

}  // namespace

ordered_json rle_to_json(const RleMask& rle) {
  ordered_json j;
  j["size"] = {rle.height, rle.width};
  j["counts"] = rle.counts;
  return j;
}

RleMask rle_from_json(const json& j) {
  if (!j.is_object() || !j.contains("size") || !j.contains("counts")) {
    fail("RLE object needs 'size' and 'counts'");
  }
  const auto& size = j["size"];
  if (!size.is_array() || size.size() != 2) fail("RLE size must be [h, w]");
  if (!j["counts"].is_array()) {
    // Compressed (string) RLE is not supported.
    fail("RLE counts must be an array of integers");
  }
  RleMask rle;
  try {
    rle.height = size[0].get<int>();
    rle.width = size[1].get<int>();
    rle.counts = j["counts"].get<std::vector<std::uint32_t>>();
  } catch (const json::exception& e) {
    fail(std::string("bad RLE: ") + e.what());
  }
  return rle;
}

std::string encode(const Message& message) {
  return std::visit(Encoder{}, message).dump();
}

Message decode(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    fail(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) fail("message is not a JSON object");
  const auto kind = get_field<std::string>(j, "kind");

  if (kind == "hello") {
    return Hello{get_field<std::string>(j, "version"),
                 get_field<std::string>(j, "model")};
  }
  if (kind == "segment") {
    SegmentRequest m;
    m.id = get_id(j);
    m.image = get_image(j);
    const auto points = get_field<std::vector<std::vector<int>>>(j, "points");
    std::vector<int> labels;
    if (j.contains("labels")) labels = get_field<std::vector<int>>(j, "labels");
    if (!labels.empty() && labels.size() != points.size()) {
      fail("labels and points differ in length");
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (points[i].size() != 2) fail("point must be [x, y]");
      const int label = labels.empty() ? 1 : labels[i];
      m.points.push_back({{points[i][0], points[i][1]},
                          label ? PointLabel::kForeground
                                : PointLabel::kBackground});
    }
    if (j.contains("box") && !j["box"].is_null()) {
      const auto b = get_field<std::vector<int>>(j, "box");
      if (b.size() != 4) fail("box must be [x0, y0, x1, y1]");
      m.box = Box{b[0], b[1], b[2], b[3]};
    }
    if (j.contains("multimask")) m.multimask = get_field<bool>(j, "multimask");
    return m;
  }
  if (kind == "saliency") {
    return SaliencyRequest{get_id(j), get_image(j)};
  }
  if (kind == "result") {
    SegmentResponse m;
    m.id = get_id(j);
    if (!j.contains("mask_rle")) fail("result without mask_rle");
    m.mask = rle_from_json(j["mask_rle"]);
    m.score = get_field<double>(j, "score");
    return m;
  }
  if (kind == "saliency_result") {
    SaliencyResponse m;
    m.id = get_id(j);
    const auto size = get_field<std::vector<int>>(j, "size");
    if (size.size() != 2) fail("size must be [h, w]");
    m.height = size[0];
    m.width = size[1];
    for (std::int64_t v : get_field<std::vector<std::int64_t>>(j, "values")) {
      if (v < 0 || v > 65535) fail("saliency value outside 0..65535");
      m.values.push_back(static_cast<std::uint16_t>(v));
    }
    if (m.width < 1 || m.height < 1 ||
        m.values.size() != static_cast<std::size_t>(m.width) * m.height) {
      fail("saliency values do not match size");
    }
    return m;
  }
  if (kind == "error") {
    ErrorResponse m;
    if (j.contains("id") && j["id"].is_number_unsigned()) {
      m.id = j["id"].get<std::uint64_t>();
    }
    if (j.contains("message") && j["message"].is_string()) {
      m.message = j["message"].get<std::string>();
    }
    return m;
  }
  fail("unknown message kind '" + kind + "'");
}

std::uint16_t quantize(double value) {
  return static_cast<std::uint16_t>(
      std::lround(std::clamp(value, 0.0, 1.0) * 65535.0));
}

double dequantize(std::uint16_t q) { return q / 65535.0; }

}  // namespace promptaug::protocol
