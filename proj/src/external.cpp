#include "promptaug/external.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <mutex>
#include <thread>

#include "promptaug/base64.hpp"
#include "promptaug/png_io.hpp"
#include "promptaug/rng.hpp"

namespace promptaug {

namespace {

constexpr std::size_t kMaxLineBytes = std::size_t{1} << 30;

void ignore_sigpipe_once() {
  static std::once_flag once;
  std::call_once(once, [] {
    struct sigaction current {};
    sigaction(SIGPIPE, nullptr, &current);
    if (current.sa_handler == SIG_DFL) {
      struct sigaction ignore {};
      ignore.sa_handler = SIG_IGN;
      sigaction(SIGPIPE, &ignore, nullptr);
    }
  });
}

int remaining_ms(ChildProcess::Clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
      deadline - ChildProcess::Clock::now());
  return static_cast<int>(std::max<long long>(left.count(), 0));
}

}  // namespace

ChildProcess::ChildProcess(const std::vector<std::string>& argv) {
  if (argv.empty()) throw Error(ErrorCode::kSpawnFailed, "empty adapter command");
  ignore_sigpipe_once();

  int in_pipe[2], out_pipe[2], err_pipe[2];
  if (pipe2(in_pipe, O_CLOEXEC) != 0) {
    throw Error(ErrorCode::kSpawnFailed, std::string("pipe: ") + std::strerror(errno));
  }
  if (pipe2(out_pipe, O_CLOEXEC) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    throw Error(ErrorCode::kSpawnFailed, std::string("pipe: ") + std::strerror(errno));
  }
  // Reports exec failure back to the parent; closes on successful exec.
  if (pipe2(err_pipe, O_CLOEXEC) != 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
    throw Error(ErrorCode::kSpawnFailed, std::string("pipe: ") + std::strerror(errno));
  }

  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  const pid_t pid = fork();
  if (pid < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0],
                   err_pipe[1]}) {
      close(fd);
    }
    throw Error(ErrorCode::kSpawnFailed, std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    execvp(args[0], args.data());
    const int err = errno;
    [[maybe_unused]] auto n = write(err_pipe[1], &err, sizeof(err));
    _exit(127);
  }

  close(in_pipe[0]);
  close(out_pipe[1]);
  close(err_pipe[1]);
  pid_ = pid;
  stdin_fd_ = in_pipe[1];
  stdout_fd_ = out_pipe[0];

  int exec_errno = 0;
  ssize_t n;
  do {
    n = read(err_pipe[0], &exec_errno, sizeof(exec_errno));
  } while (n < 0 && errno == EINTR);
  close(err_pipe[0]);
  if (n > 0) {
    shutdown();
    throw Error(ErrorCode::kSpawnFailed,
                "cannot execute '" + argv[0] + "': " + std::strerror(exec_errno));
  }
}

ChildProcess::~ChildProcess() { shutdown(); }

void ChildProcess::shutdown() {
  if (stdin_fd_ >= 0) close(stdin_fd_);
  if (stdout_fd_ >= 0) close(stdout_fd_);
  stdin_fd_ = stdout_fd_ = -1;
  if (pid_ <= 0 || reaped_) return;

  // EOF on stdin first, then SIGTERM, then SIGKILL.
  auto wait_for = [&](std::chrono::milliseconds limit) {
    const auto until = Clock::now() + limit;
    while (Clock::now() < until) {
      int status = 0;
      if (waitpid(pid_, &status, WNOHANG) == pid_) return true;
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    return false;
  };
  if (!wait_for(std::chrono::milliseconds(500))) {
    kill(pid_, SIGTERM);
    if (!wait_for(std::chrono::milliseconds(1000))) {
      kill(pid_, SIGKILL);
      waitpid(pid_, nullptr, 0);
    }
  }
  reaped_ = true;
}

bool ChildProcess::running() {
  if (pid_ <= 0 || reaped_) return false;
  int status = 0;
  if (waitpid(pid_, &status, WNOHANG) == pid_) {
    reaped_ = true;
    return false;
  }
  return true;
}

bool ChildProcess::write_line(const std::string& line,
                              Clock::time_point deadline) {
  if (stdin_fd_ < 0) return false;
  const std::string data = line + "\n";
  std::size_t off = 0;
  while (off < data.size()) {
    pollfd pfd{stdin_fd_, POLLOUT, 0};
    const int rc = poll(&pfd, 1, remaining_ms(deadline));
    if (rc < 0 && errno == EINTR) continue;
    if (rc <= 0) return false;
    if (pfd.revents & (POLLERR | POLLHUP)) return false;
    const ssize_t n = write(stdin_fd_, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      return false;
    }
    off += static_cast<std::size_t>(n);
  }
  return true;
}

ChildProcess::ReadStatus ChildProcess::read_line(std::string& line,
                                                 Clock::time_point deadline) {
  for (;;) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return ReadStatus::kOk;
    }
    if (stdout_fd_ < 0) return ReadStatus::kClosed;
    if (buffer_.size() > kMaxLineBytes) return ReadStatus::kClosed;
    pollfd pfd{stdout_fd_, POLLIN, 0};
    const int rc = poll(&pfd, 1, remaining_ms(deadline));
    if (rc < 0 && errno == EINTR) continue;
    if (rc < 0) return ReadStatus::kClosed;
    if (rc == 0) return ReadStatus::kTimeout;
    char chunk[65536];
    const ssize_t n = read(stdout_fd_, chunk, sizeof(chunk));
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      return ReadStatus::kClosed;
    }
    if (n == 0) return ReadStatus::kClosed;
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

AdapterClient::AdapterClient(const ProcessSpec& spec)
    : spec_(spec), child_(spec.argv) {
  std::string line;
  const auto deadline = ChildProcess::Clock::now() + spec_.handshake_timeout;
  switch (child_.read_line(line, deadline)) {
    case ChildProcess::ReadStatus::kTimeout:
      throw Error(ErrorCode::kHandshakeTimeout,
                  "adapter sent no hello within " +
                      std::to_string(spec_.handshake_timeout.count()) + " ms");
    case ChildProcess::ReadStatus::kClosed:
      throw Error(ErrorCode::kSpawnFailed, "adapter exited before hello");
    case ChildProcess::ReadStatus::kOk:
      break;
  }
  const auto msg = protocol::decode(line);
  const auto* hello = std::get_if<protocol::Hello>(&msg);
  if (hello == nullptr) {
    throw Error(ErrorCode::kProtocolError, "first adapter message is not hello");
  }
  if (hello->version != protocol::kVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                "adapter speaks protocol version '" + hello->version +
                    "', expected '" + std::string(protocol::kVersion) + "'");
  }
  hello_ = *hello;
}

std::string AdapterClient::raw_exchange(const std::string& line) {
  if (broken_) {
    throw Error(ErrorCode::kSegmenterUnavailable, "adapter connection is broken");
  }
  const auto deadline = ChildProcess::Clock::now() + spec_.request_timeout;
  if (!child_.write_line(line, deadline)) {
    broken_ = true;
    throw Error(ErrorCode::kSegmenterUnavailable, "adapter stdin closed");
  }
  std::string reply;
  const auto status = child_.read_line(reply, deadline);
  if (status != ChildProcess::ReadStatus::kOk) {
    broken_ = true;
    throw Error(ErrorCode::kSegmenterUnavailable,
                status == ChildProcess::ReadStatus::kTimeout
                    ? "adapter timed out"
                    : "adapter closed its output");
  }
  return reply;
}

protocol::Message AdapterClient::round_trip(const protocol::Message& request,
                                            std::uint64_t id) {
  const std::string reply = raw_exchange(protocol::encode(request));
  protocol::Message msg;
  try {
    msg = protocol::decode(reply);
  } catch (const Error&) {
    broken_ = true;
    throw;
  }
  if (const auto* err = std::get_if<protocol::ErrorResponse>(&msg)) {
    if (err->id && *err->id != id) {
      broken_ = true;
      throw Error(ErrorCode::kProtocolError, "error reply for a different id");
    }
    throw Error(ErrorCode::kAdapterError, "adapter error: " + err->message);
  }
  return msg;
}

protocol::SegmentResponse AdapterClient::segment(
    const protocol::ImageSource& image, const PromptSet& prompts) {
  const std::uint64_t id = next_id_++;
  protocol::SegmentRequest req{id, image, prompts.points, prompts.box,
                               prompts.multimask};
  auto msg = round_trip(req, id);
  auto* res = std::get_if<protocol::SegmentResponse>(&msg);
  if (res == nullptr) {
    broken_ = true;
    throw Error(ErrorCode::kProtocolError, "expected a result message");
  }
  if (res->id != id) {
    broken_ = true;
    throw Error(ErrorCode::kProtocolError,
                "response id " + std::to_string(res->id) + " for request " +
                    std::to_string(id));
  }
  return std::move(*res);
}

protocol::SaliencyResponse AdapterClient::saliency(
    const protocol::ImageSource& image) {
  const std::uint64_t id = next_id_++;
  auto msg = round_trip(protocol::SaliencyRequest{id, image}, id);
  auto* res = std::get_if<protocol::SaliencyResponse>(&msg);
  if (res == nullptr) {
    broken_ = true;
    throw Error(ErrorCode::kProtocolError, "expected a saliency_result message");
  }
  if (res->id != id) {
    broken_ = true;
    throw Error(ErrorCode::kProtocolError,
                "response id " + std::to_string(res->id) + " for request " +
                    std::to_string(id));
  }
  return std::move(*res);
}

ImageStager::ImageStager(bool inline_images) : inline_images_(inline_images) {}

ImageStager::~ImageStager() {
  if (!scratch_.empty()) {
    std::error_code ec;
    std::filesystem::remove_all(scratch_, ec);
  }
}

protocol::ImageSource ImageStager::stage(
    const Image& image, const std::optional<std::filesystem::path>& path) {
  protocol::ImageSource source;
  if (inline_images_) {
    source.png_base64 = base64::encode(encode_png(image));
    return source;
  }
  if (path) {
    source.path = std::filesystem::absolute(*path).string();
    return source;
  }
  if (scratch_.empty()) {
    static std::atomic<unsigned> counter{0};
    scratch_ = std::filesystem::temp_directory_path() /
               ("promptaug-" + std::to_string(getpid()) + "-" +
                std::to_string(counter++));
    std::filesystem::create_directories(scratch_);
  }
  // Content-addressed so an adapter-side cache keyed by path never sees
  // two different images under one name.
  std::uint64_t h = fnv1a(std::string_view(
      reinterpret_cast<const char*>(image.pixels().data()), image.pixels().size()));
  h = derive_seed(h, {static_cast<std::uint64_t>(image.width()),
                      static_cast<std::uint64_t>(image.height()),
                      static_cast<std::uint64_t>(image.channels())});
  char name[32];
  std::snprintf(name, sizeof(name), "%016llx.png",
                static_cast<unsigned long long>(h));
  const auto file = scratch_ / name;
  if (!std::filesystem::exists(file)) write_png(file, image);
  source.path = file.string();
  return source;
}

ExternalSegmenter::ExternalSegmenter(const ProcessSpec& spec)
    : client_(spec), stager_(spec.inline_images) {}

SegmentationResult ExternalSegmenter::segment(
    const Image& image, const PromptSet& prompts,
    const std::optional<std::filesystem::path>& image_path) {
  validate_prompts(image, prompts);
  const auto response = client_.segment(stager_.stage(image, image_path), prompts);
  BinaryMask mask;
  try {
    mask = rle_decode(response.mask);
  } catch (const Error& e) {
    throw Error(ErrorCode::kProtocolError, std::string("bad mask: ") + e.what());
  }
  if (mask.width() != image.width() || mask.height() != image.height()) {
    throw Error(ErrorCode::kProtocolError, "mask size differs from image");
  }
  if (!(response.score >= 0.0 && response.score <= 1.0)) {
    throw Error(ErrorCode::kProtocolError, "score outside [0, 1]");
  }
  return {std::move(mask), response.score};
}

std::string ExternalSegmenter::name() const {
  return "external(" + client_.hello().model + ")";
}

ExternalSaliencySource::ExternalSaliencySource(const ProcessSpec& spec) try
    : client_(spec), stager_(spec.inline_images) {
} catch (const Error& e) {
  throw Error(ErrorCode::kProviderUnavailable,
              std::string("saliency provider: ") + e.what());
}

SaliencyMap ExternalSaliencySource::compute(const Image& img) {
  protocol::SaliencyResponse response;
  try {
    response = client_.saliency(stager_.stage(img));
  } catch (const Error& e) {
    throw Error(ErrorCode::kProviderUnavailable,
                std::string("saliency provider: ") + e.what());
  }
  if (response.width != img.width() || response.height != img.height()) {
    throw Error(ErrorCode::kProviderUnavailable,
                "saliency provider returned a map of the wrong size");
  }
  std::vector<double> values(response.values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = protocol::dequantize(response.values[i]);
  }
  return normalize_saliency(response.width, response.height, std::move(values));
}

std::string ExternalSaliencySource::name() const {
  return "external(" + client_.hello().model + ")";
}

}  // namespace promptaug
