// Protocol test double. Answers segment requests with the disk mock (or the
// filled box for box-only requests) and saliency requests with the in-tree
// spectral residual map. --mode selects a misbehaviour for fault tests.

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <string>
#include <thread>

#include "promptaug/base64.hpp"
#include "promptaug/png_io.hpp"
#include "promptaug/protocol.hpp"
#include "promptaug/saliency.hpp"
#include "promptaug/segmenter.hpp"

namespace pa = promptaug;
namespace proto = promptaug::protocol;

namespace {

struct Options {
  std::string mode = "normal";
  int radius = 8;
  std::string saliency = "spectral";  // spectral | flat | none
};

Options parse(int argc, char** argv) {
  Options o;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string key = argv[i];
    if (key == "--mode") o.mode = argv[i + 1];
    else if (key == "--radius") o.radius = std::atoi(argv[i + 1]);
    else if (key == "--saliency") o.saliency = argv[i + 1];
  }
  return o;
}

pa::Image load(const proto::ImageSource& src) {
  if (src.png_base64) return pa::decode_png(pa::base64::decode(*src.png_base64));
  return pa::read_png(*src.path);
}

void emit(const proto::Message& m) { std::cout << proto::encode(m) << '\n' << std::flush; }

void hang() {
  for (;;) std::this_thread::sleep_for(std::chrono::hours(1));
}

}  // namespace

int main(int argc, char** argv) {
  const Options opt = parse(argc, argv);
  if (opt.mode == "silent") hang();
  if (opt.mode == "exit") return 3;
  if (opt.mode == "garbage_hello") {
    std::cout << "ready!\n" << std::flush;
  } else {
    emit(proto::Hello{opt.mode == "version0" ? "0" : std::string(proto::kVersion),
                      "echo-disk-r" + std::to_string(opt.radius)});
  }
  if (opt.mode == "crash_after_hello") return 4;

  pa::DiskSegmenter disk(opt.radius);
  pa::BoxFillSegmenter fill;
  std::string line;
  while (std::getline(std::cin, line)) {
    proto::Message msg;
    try {
      msg = proto::decode(line);
    } catch (const std::exception& e) {
      emit(proto::ErrorResponse{std::nullopt, e.what()});
      continue;
    }
    if (opt.mode == "crash_on_request") return 5;
    if (opt.mode == "hang_on_request") hang();
    if (opt.mode == "garbage") {
      std::cout << "%%%\n" << std::flush;
      continue;
    }
    try {
      if (const auto* req = std::get_if<proto::SegmentRequest>(&msg)) {
        const pa::Image img = load(req->image);
        pa::PromptSet prompts{req->points, req->box, req->multimask};
        const bool box_only = prompts.points.empty() && prompts.box;
        const auto result = box_only ? fill.segment(img, prompts)
                                     : disk.segment(img, prompts);
        const std::uint64_t id = opt.mode == "wrong_id" ? req->id + 1 : req->id;
        emit(proto::SegmentResponse{id, pa::rle_encode(result.mask), 0.875});
      } else if (const auto* sreq = std::get_if<proto::SaliencyRequest>(&msg)) {
        if (opt.saliency == "none") {
          emit(proto::ErrorResponse{sreq->id, "saliency not supported"});
          continue;
        }
        const pa::Image img = load(sreq->image);
        const std::uint64_t id = opt.mode == "wrong_id" ? sreq->id + 1 : sreq->id;
        proto::SaliencyResponse res{id, img.width(), img.height(), {}};
        res.values.assign(static_cast<std::size_t>(img.width()) * img.height(), 0);
        if (opt.saliency == "spectral") {
          const auto map = pa::spectral_residual_saliency(img);
          for (std::size_t i = 0; i < map.values.size(); ++i) {
            res.values[i] = proto::quantize(map.values[i]);
          }
        }
        emit(res);
      } else {
        emit(proto::ErrorResponse{std::nullopt, "unexpected message kind"});
      }
    } catch (const std::exception& e) {
      std::optional<std::uint64_t> id;
      if (const auto* r = std::get_if<proto::SegmentRequest>(&msg)) id = r->id;
      if (const auto* r = std::get_if<proto::SaliencyRequest>(&msg)) id = r->id;
      emit(proto::ErrorResponse{id, e.what()});
    }
  }
  return 0;
}
