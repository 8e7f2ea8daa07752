#include "promptaug/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace promptaug::log {

namespace {
std::mutex g_mutex;
std::atomic<Level> g_min_level{Level::kInfo};

const char* label(Level level) {
  switch (level) {
    case Level::kDebug: return "debug";
    case Level::kInfo: return "info";
    case Level::kWarn: return "warning";
    case Level::kError: return "error";
  }
  return "?";
}
}  // namespace

void set_min_level(Level level) { g_min_level = level; }

void write(Level level, std::string_view message) {
  if (level < g_min_level.load()) return;
  std::lock_guard<std::mutex> lock(g_mutex);
  std::cerr << "[promptaug] " << label(level) << ": " << message << '\n';
}

}  // namespace promptaug::log
