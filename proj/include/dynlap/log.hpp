#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <sstream>
#include <string>

// Minimal leveled logger. Verbosity is controlled by the DYNLAP_LOG
// environment variable: error | warn | info | debug (default warn).
namespace dynlap::logging {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

inline Level threshold() {
  static Level cached = [] {
    const char* env = std::getenv("DYNLAP_LOG");
    if (env == nullptr) return Level::warn;
    if (std::strcmp(env, "error") == 0) return Level::error;
    if (std::strcmp(env, "info") == 0) return Level::info;
    if (std::strcmp(env, "debug") == 0) return Level::debug;
    return Level::warn;
  }();
  return cached;
}

inline bool enabled(Level level) { return static_cast<int>(level) <= static_cast<int>(threshold()); }

inline void write(Level level, const std::string& message) {
  if (!enabled(level)) return;
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::fprintf(stderr, "[dynlap:%s] %s\n", names[static_cast<int>(level)], message.c_str());
}

template <typename... Args>
void log(Level level, const Args&... args) {
  if (!enabled(level)) return;
  std::ostringstream oss;
  (oss << ... << args);
  write(level, oss.str());
}

template <typename... Args>
void error(const Args&... args) { log(Level::error, args...); }
template <typename... Args>
void warn(const Args&... args) { log(Level::warn, args...); }
template <typename... Args>
void info(const Args&... args) { log(Level::info, args...); }
template <typename... Args>
void debug(const Args&... args) { log(Level::debug, args...); }

}  // namespace dynlap::logging
