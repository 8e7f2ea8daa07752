#pragma once

// Newline-delimited JSON spoken with external segmenter / saliency
// processes over their stdin/stdout. One JSON object per line, keys in the
// order shown:
//
//   child  -> {"kind":"hello","version":"1","model":"<name>"}
//   parent -> {"kind":"segment","id":N,"image_path":"...","points":[[x,y]],
//              "labels":[1],"box":[x0,y0,x1,y1]|null,"multimask":true}
//   child  -> {"kind":"result","id":N,"mask_rle":{"size":[h,w],
//              "counts":[...]},"score":0.97}
//   parent -> {"kind":"saliency","id":N,"image_path":"..."}
//   child  -> {"kind":"saliency_result","id":N,"size":[h,w],"values":[...]}
//   child  -> {"kind":"error","id":N|null,"message":"..."}
//
// "image_png_b64" replaces "image_path" when images travel inline. Saliency
// values are 16-bit fixed point (v * 65535, rounded).

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "promptaug/imgcore.hpp"

namespace promptaug::protocol {

inline constexpr std::string_view kVersion = "1";

struct ImageSource {
  std::optional<std::string> path;
  std::optional<std::string> png_base64;
};

struct Hello {
  std::string version;
  std::string model;
};

struct SegmentRequest {
  std::uint64_t id = 0;
  ImageSource image;
  std::vector<PointPrompt> points;
  std::optional<Box> box;
  bool multimask = true;
};

struct SaliencyRequest {
  std::uint64_t id = 0;
  ImageSource image;
};

struct SegmentResponse {
  std::uint64_t id = 0;
  RleMask mask;
  double score = 0.0;
};

struct SaliencyResponse {
  std::uint64_t id = 0;
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> values;
};

struct ErrorResponse {
  std::optional<std::uint64_t> id;
  std::string message;
};

using Message = std::variant<Hello, SegmentRequest, SaliencyRequest,
                             SegmentResponse, SaliencyResponse, ErrorResponse>;

// Single line, no trailing newline.
std::string encode(const Message& message);

// Throws Error(kProtocolError) on anything that is not a well-formed message.
Message decode(std::string_view line);

nlohmann::ordered_json rle_to_json(const RleMask& rle);
RleMask rle_from_json(const nlohmann::json& j);

std::uint16_t quantize(double value);
double dequantize(std::uint16_t q);

}  // namespace promptaug::protocol
