#include "promptaug/conformance.hpp"

#include <fstream>

#include "promptaug/base64.hpp"
#include "promptaug/external.hpp"
#include "promptaug/png_io.hpp"
#include "promptaug/protocol.hpp"

namespace promptaug {

namespace fs = std::filesystem;

bool ConformanceReport::passed() const {
  if (checks.empty()) return false;
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

namespace {

Image probe_image() {
  Image img(24, 16, 1);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      img.at(x, y) = static_cast<std::uint8_t>((x * 7 + y * 13) % 256);
    }
  }
  return img;
}

protocol::ImageSource inline_source(const Image& img) {
  protocol::ImageSource src;
  src.png_base64 = base64::encode(encode_png(img));
  return src;
}

std::string check_mask(const protocol::SegmentResponse& res, const Image& img) {
  if (res.mask.width != img.width() || res.mask.height != img.height()) {
    return "mask size " + std::to_string(res.mask.width) + "x" +
           std::to_string(res.mask.height) + " differs from image";
  }
  if (!(res.score >= 0.0 && res.score <= 1.0)) return "score outside [0, 1]";
  try {
    rle_decode(res.mask);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

std::vector<GoldenPair> read_golden(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open golden file " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.size() % 2 != 0) {
    throw Error(ErrorCode::kParseError,
                "golden file needs request/response line pairs");
  }
  std::vector<GoldenPair> pairs;
  for (std::size_t i = 0; i < lines.size(); i += 2) {
    pairs.push_back({lines[i], lines[i + 1]});
  }
  return pairs;
}

std::vector<std::string> golden_requests() {
  const Image img = probe_image();
  const auto src = inline_source(img);
  std::vector<std::string> out;
  out.push_back(protocol::encode(protocol::SegmentRequest{
      1001, src, {{{5, 4}, PointLabel::kForeground}}, std::nullopt, true}));
  out.push_back(protocol::encode(
      protocol::SegmentRequest{1002, src, {}, Box{3, 2, 14, 11}, true}));
  out.push_back(protocol::encode(protocol::SegmentRequest{
      1003, src, {{{18, 9}, PointLabel::kForeground}}, Box{10, 3, 22, 14}, true}));
  return out;
}

ConformanceReport validate_adapter(const ProcessSpec& spec,
                                   const std::optional<fs::path>& golden) {
  ConformanceReport report;
  auto add = [&](std::string name, bool ok, std::string detail = {}) {
    report.checks.push_back({std::move(name), ok, std::move(detail)});
  };

  std::optional<AdapterClient> client;
  try {
    client.emplace(spec);
    report.model = client->hello().model;
    add("handshake", true, "version " + client->hello().version);
  } catch (const Error& e) {
    add("handshake", false, std::string(error_code_name(e.code())) + ": " + e.what());
    return report;
  }

  const Image img = probe_image();
  const auto src = inline_source(img);
  std::optional<RleMask> first_mask;
  auto segment_check = [&](const std::string& name, const PromptSet& prompts) {
    try {
      const auto res = client->segment(src, prompts);
      const std::string problem = check_mask(res, img);
      add(name, problem.empty(), problem);
      return std::optional<RleMask>(res.mask);
    } catch (const Error& e) {
      add(name, false, std::string(error_code_name(e.code())) + ": " + e.what());
      return std::optional<RleMask>();
    }
  };

  PromptSet point;
  point.points = {{{5, 4}, PointLabel::kForeground}};
  first_mask = segment_check("segment_point", point);

  PromptSet box;
  box.box = Box{3, 2, 14, 11};
  segment_check("segment_box", box);

  try {
    const std::string reply = client->raw_exchange("{this is not json");
    const auto msg = protocol::decode(reply);
    const auto* err = std::get_if<protocol::ErrorResponse>(&msg);
    add("malformed_line", err != nullptr && !err->id,
        err ? "" : "expected an error reply with a null id");
  } catch (const Error& e) {
    add("malformed_line", false, e.what());
  }

  const auto again = segment_check("alive_after_error", point);
  if (first_mask && again) {
    add("repeatable", first_mask->counts == again->counts,
        first_mask->counts == again->counts ? "" : "same request, different mask");
  }

  try {
    const auto res = client->saliency(src);
    const bool ok = res.width == img.width() && res.height == img.height() &&
                    res.values.size() ==
                        static_cast<std::size_t>(img.width()) * img.height();
    add("saliency", ok, ok ? "" : "saliency map shape mismatch");
  } catch (const Error& e) {
    // Saliency is optional; an explicit error reply means "not offered".
    if (e.code() == ErrorCode::kAdapterError) {
      add("saliency", true, "not supported");
    } else {
      add("saliency", false, e.what());
    }
  }

  if (golden) {
    std::vector<GoldenPair> pairs;
    try {
      pairs = read_golden(*golden);
    } catch (const Error& e) {
      add("golden", false, e.what());
      return report;
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const std::string name = "golden_" + std::to_string(i + 1);
      try {
        const std::string reply = client->raw_exchange(pairs[i].request);
        add(name, reply == pairs[i].response,
            reply == pairs[i].response ? "" : "reply differs: " + reply.substr(0, 160));
      } catch (const Error& e) {
        add(name, false, e.what());
      }
    }
  }
  return report;
}

void record_golden(const ProcessSpec& spec, const fs::path& out) {
  AdapterClient client(spec);
  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::kIoError, "cannot write " + out.string());
  for (const auto& request : golden_requests()) {
    f << request << '\n' << client.raw_exchange(request) << '\n';
  }
}

}  // namespace promptaug
