#pragma once

#include <sys/types.h>

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "promptaug/protocol.hpp"
#include "promptaug/saliency.hpp"
#include "promptaug/segmenter.hpp"

namespace promptaug {

// A child process whose stdin/stdout are pipes owned by this object.
// Not thread-safe; confine to one worker.
class ChildProcess {
 public:
  using Clock = std::chrono::steady_clock;

  enum class ReadStatus { kOk, kTimeout, kClosed };

  explicit ChildProcess(const std::vector<std::string>& argv);
  ~ChildProcess();

  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  // Writes `line` plus '\n'. Returns false if the child closed its stdin
  // or the deadline passed.
  bool write_line(const std::string& line, Clock::time_point deadline);
  ReadStatus read_line(std::string& line, Clock::time_point deadline);

  pid_t pid() const { return pid_; }
  bool running();

 private:
  void shutdown();

  pid_t pid_ = -1;
  int stdin_fd_ = -1;
  int stdout_fd_ = -1;
  std::string buffer_;
  bool reaped_ = false;
};

// Protocol client: handshake on construction, then strictly one request in
// flight. After any transport failure the client refuses further requests,
// since a late reply could otherwise be paired with the wrong request.
class AdapterClient {
 public:
  explicit AdapterClient(const ProcessSpec& spec);

  const protocol::Hello& hello() const { return hello_; }

  protocol::SegmentResponse segment(const protocol::ImageSource& image,
                                    const PromptSet& prompts);
  protocol::SaliencyResponse saliency(const protocol::ImageSource& image);

  // Sends an arbitrary raw line and returns the raw reply; for conformance
  // checks only.
  std::string raw_exchange(const std::string& line);

  std::uint64_t last_request_id() const { return next_id_ - 1; }

 private:
  protocol::Message round_trip(const protocol::Message& request,
                               std::uint64_t id);

  ProcessSpec spec_;
  ChildProcess child_;
  protocol::Hello hello_;
  std::uint64_t next_id_ = 1;
  bool broken_ = false;
};

// Turns an in-memory image into something the child can open: the
// original path when there is one, otherwise a PNG in a private scratch
// directory (or inline base64 when requested).
class ImageStager {
 public:
  explicit ImageStager(bool inline_images);
  ~ImageStager();

  ImageStager(const ImageStager&) = delete;
  ImageStager& operator=(const ImageStager&) = delete;

  protocol::ImageSource stage(
      const Image& image,
      const std::optional<std::filesystem::path>& path = std::nullopt);

 private:
  bool inline_images_;
  std::filesystem::path scratch_;
};

class ExternalSegmenter final : public Segmenter {
 public:
  explicit ExternalSegmenter(const ProcessSpec& spec);

  SegmentationResult segment(
      const Image& image, const PromptSet& prompts,
      const std::optional<std::filesystem::path>& image_path) override;
  std::string name() const override;

 private:
  AdapterClient client_;
  ImageStager stager_;
};

class ExternalSaliencySource final : public SaliencySource {
 public:
  explicit ExternalSaliencySource(const ProcessSpec& spec);

  // Any transport or protocol failure surfaces as ProviderUnavailable.
  SaliencyMap compute(const Image& img) override;
  std::string name() const override;

 private:
  AdapterClient client_;
  ImageStager stager_;
};

}  // namespace promptaug
