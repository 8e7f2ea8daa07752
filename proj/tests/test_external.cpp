#include <doctest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>

#include "oracles.hpp"
#include "promptaug/conformance.hpp"
#include "promptaug/external.hpp"
#include "promptaug/png_io.hpp"

using namespace promptaug;
using namespace std::chrono_literals;
namespace fs = std::filesystem;

namespace {

ProcessSpec echo(std::vector<std::string> args = {},
                 std::chrono::milliseconds handshake = 5000ms,
                 std::chrono::milliseconds request = 5000ms) {
  ProcessSpec spec;
  spec.argv = {PROMPTAUG_ECHO_ADAPTER};
  spec.argv.insert(spec.argv.end(), args.begin(), args.end());
  spec.handshake_timeout = handshake;
  spec.request_timeout = request;
  return spec;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no throw");
  return ErrorCode::kInvalidArgument;
}

PromptSet one_point(Point p) {
  PromptSet s;
  s.points.push_back({p, PointLabel::kForeground});
  return s;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("promptaug_test_" + name + "_" +
                                                std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("handshake with the echo adapter") {
  AdapterClient client(echo({"--radius", "5"}));
  CHECK(client.hello().version == "1");
  CHECK(client.hello().model == "echo-disk-r5");
}

TEST_CASE("external segmenter matches the in-tree disk mock") {
  SplitMix64 rng(1);
  const auto img = oracle::random_gray(rng, 40, 30, 256);
  DiskSegmenter local(6);
  for (bool inline_images : {false, true}) {
    auto spec = echo({"--radius", "6"});
    spec.inline_images = inline_images;
    ExternalSegmenter remote(spec);
    CHECK(remote.name() == "external(echo-disk-r6)");
    for (Point p : {Point{3, 3}, Point{20, 15}, Point{39, 29}}) {
      const auto want = local.segment(img, one_point(p));
      const auto got = remote.segment(img, one_point(p), std::nullopt);
      CHECK(got.mask == want.mask);
      CHECK(got.score == 0.875);
    }
  }
}

TEST_CASE("images travel by path when the sample has one") {
  const auto dir = scratch_dir("path");
  SplitMix64 rng(2);
  const auto img = oracle::random_gray(rng, 16, 12, 256);
  write_png(dir / "img.png", img);
  ExternalSegmenter remote(echo({"--radius", "2"}));
  const auto got = remote.segment(img, one_point({8, 6}), dir / "img.png");
  CHECK(got.mask == disk_mask(16, 12, {8, 6}, 2));
  fs::remove_all(dir);
}

TEST_CASE("adapter errors surface as AdapterError and the client stays usable") {
  ExternalSegmenter remote(echo());
  const Image img(10, 10, 1);
  PromptSet bg;
  bg.points.push_back({{2, 2}, PointLabel::kBackground});
  // Validation happens client-side first; an all-background request is
  // well formed, so the adapter's disk mock is the one that rejects it.
  CHECK(code_of([&] { remote.segment(img, bg, std::nullopt); }) == ErrorCode::kAdapterError);
  CHECK(remote.segment(img, one_point({5, 5}), std::nullopt).mask.any());
}

TEST_CASE("silent adapter times out at the handshake deadline") {
  const auto t0 = std::chrono::steady_clock::now();
  CHECK(code_of([] { AdapterClient c(echo({"--mode", "silent"}, 300ms)); }) ==
        ErrorCode::kHandshakeTimeout);
  const double took = seconds_since(t0);
  CHECK(took >= 0.29);
  CHECK(took < 5.0);
}

TEST_CASE("handshake failures") {
  CHECK(code_of([] { AdapterClient c(echo({"--mode", "version0"})); }) ==
        ErrorCode::kVersionMismatch);
  CHECK(code_of([] { AdapterClient c(echo({"--mode", "exit"})); }) ==
        ErrorCode::kSpawnFailed);
  CHECK(code_of([] { AdapterClient c(echo({"--mode", "garbage_hello"})); }) ==
        ErrorCode::kProtocolError);
  ProcessSpec missing;
  missing.argv = {"/nonexistent/adapter-binary"};
  missing.handshake_timeout = 5000ms;
  CHECK(code_of([&] { AdapterClient c(missing); }) == ErrorCode::kSpawnFailed);
}

TEST_CASE("adapter crash or hang mid-request fails within the deadline") {
  const Image img(12, 12, 1);
  for (const char* mode : {"crash_on_request", "crash_after_hello"}) {
    ExternalSegmenter remote(echo({"--mode", mode}));
    const auto t0 = std::chrono::steady_clock::now();
    CHECK(code_of([&] { remote.segment(img, one_point({1, 1}), std::nullopt); }) ==
          ErrorCode::kSegmenterUnavailable);
    CHECK(seconds_since(t0) < 5.0);
    // The client refuses further work on a broken connection.
    CHECK(code_of([&] { remote.segment(img, one_point({1, 1}), std::nullopt); }) ==
          ErrorCode::kSegmenterUnavailable);
  }
  ExternalSegmenter hung(echo({"--mode", "hang_on_request"}, 5000ms, 300ms));
  const auto t0 = std::chrono::steady_clock::now();
  CHECK(code_of([&] { hung.segment(img, one_point({1, 1}), std::nullopt); }) ==
        ErrorCode::kSegmenterUnavailable);
  CHECK(seconds_since(t0) < 5.0);
}

TEST_CASE("protocol violations are ProtocolError, never reassociated") {
  const Image img(12, 12, 1);
  ExternalSegmenter wrong(echo({"--mode", "wrong_id"}));
  CHECK(code_of([&] { wrong.segment(img, one_point({1, 1}), std::nullopt); }) ==
        ErrorCode::kProtocolError);
  ExternalSegmenter garbage(echo({"--mode", "garbage"}));
  CHECK(code_of([&] { garbage.segment(img, one_point({1, 1}), std::nullopt); }) ==
        ErrorCode::kProtocolError);
}

TEST_CASE("request ids increase monotonically") {
  AdapterClient client(echo());
  ImageStager stager(true);
  const Image img(8, 8, 1);
  const auto src = stager.stage(img);
  for (std::uint64_t i = 1; i <= 4; ++i) {
    const auto r = client.segment(src, one_point({2, 2}));
    CHECK(r.id == i);
    CHECK(client.last_request_id() == i);
  }
}

TEST_CASE("external saliency matches the in-tree detector up to quantization") {
  SplitMix64 rng(3);
  const auto img = oracle::random_gray(rng, 24, 20, 256);
  ExternalSaliencySource remote(echo());
  const auto got = remote.compute(img);
  const auto want = spectral_residual_saliency(img);
  REQUIRE(got.values.size() == want.values.size());
  for (std::size_t i = 0; i < got.values.size(); ++i) {
    CHECK(std::abs(got.values[i] - want.values[i]) < 2e-5);
  }
}

TEST_CASE("external saliency: flat map normalizes to zero") {
  ExternalSaliencySource flat(echo({"--saliency", "flat"}));
  SplitMix64 rng(4);
  for (double v : flat.compute(oracle::random_gray(rng, 10, 10, 256)).values) CHECK(v == 0.0);
}

TEST_CASE("external saliency failures are ProviderUnavailable") {
  const Image img(10, 10, 1);
  for (const char* mode : {"crash_on_request", "garbage", "wrong_id"}) {
    ExternalSaliencySource src(echo({"--mode", mode}));
    CHECK(code_of([&] { src.compute(img); }) == ErrorCode::kProviderUnavailable);
  }
  ExternalSaliencySource none(echo({"--saliency", "none"}));
  CHECK(code_of([&] { none.compute(img); }) == ErrorCode::kProviderUnavailable);
  CHECK(code_of([] { ExternalSaliencySource s(echo({"--mode", "version0"})); }) ==
        ErrorCode::kProviderUnavailable);
  ExternalSaliencySource hung(echo({"--mode", "hang_on_request"}, 5000ms, 300ms));
  const auto t0 = std::chrono::steady_clock::now();
  CHECK(code_of([&] { hung.compute(img); }) == ErrorCode::kProviderUnavailable);
  CHECK(seconds_since(t0) < 5.0);
}

TEST_CASE("conformance passes against the echo adapter and fails on faults") {
  const auto report = validate_adapter(echo());
  for (const auto& c : report.checks) {
    INFO(c.name << ": " << c.detail);
    CHECK(c.passed);
  }
  CHECK(report.passed());
  CHECK(report.model == "echo-disk-r8");

  CHECK_FALSE(validate_adapter(echo({"--mode", "version0"})).passed());
  CHECK_FALSE(validate_adapter(echo({"--mode", "wrong_id"})).passed());
  CHECK_FALSE(validate_adapter(echo({"--mode", "silent"}, 300ms)).passed());
}

TEST_CASE("golden record and replay") {
  const auto dir = scratch_dir("golden");
  const auto path = dir / "golden.ndjson";
  record_golden(echo({"--radius", "4"}), path);
  const auto pairs = read_golden(path);
  CHECK(pairs.size() == golden_requests().size());

  CHECK(validate_adapter(echo({"--radius", "4"}), path).passed());
  // A different model answers different bytes.
  const auto other = validate_adapter(echo({"--radius", "5"}), path);
  CHECK_FALSE(other.passed());
  fs::remove_all(dir);
}

TEST_CASE("two clients run side by side without crosstalk") {
  ExternalSegmenter a(echo({"--radius", "2"}));
  ExternalSegmenter b(echo({"--radius", "4"}));
  const Image img(20, 20, 1);
  for (int i = 0; i < 5; ++i) {
    CHECK(a.segment(img, one_point({10, 10}), std::nullopt).mask.count() == 13);
    CHECK(b.segment(img, one_point({10, 10}), std::nullopt).mask.count() == 49);
  }
}
