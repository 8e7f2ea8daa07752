#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "promptaug/segmenter.hpp"

namespace promptaug {

struct ConformanceCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ConformanceReport {
  std::string model;
  std::vector<ConformanceCheck> checks;

  bool passed() const;
};

// Golden files are NDJSON: a request line followed by the exact expected
// reply line, repeated. Blank lines are ignored.
struct GoldenPair {
  std::string request;
  std::string response;
};

std::vector<GoldenPair> read_golden(const std::filesystem::path& path);

// The fixed requests used for golden recording: a point, a box and a
// point+box request on a small built-in image sent inline.
std::vector<std::string> golden_requests();

/// Handshake, built-in segment/box/malformed-line/saliency probes, then
/// byte-exact replay of `golden` when given. Never throws for adapter
/// misbehaviour; failures are reported as checks.
ConformanceReport validate_adapter(
    const ProcessSpec& spec,
    const std::optional<std::filesystem::path>& golden = std::nullopt);

// Sends golden_requests() to a trusted adapter and writes request/reply
// pairs to `out`.
void record_golden(const ProcessSpec& spec, const std::filesystem::path& out);

}  // namespace promptaug
