#pragma once

#include <string_view>

namespace promptaug::log {

enum class Level { kDebug, kInfo, kWarn, kError };

// Lines go to stderr as "[promptaug] <level>: <message>". Thread-safe.
void write(Level level, std::string_view message);
void set_min_level(Level level);

inline void info(std::string_view m) { write(Level::kInfo, m); }
inline void warn(std::string_view m) { write(Level::kWarn, m); }
inline void error(std::string_view m) { write(Level::kError, m); }

}  // namespace promptaug::log
