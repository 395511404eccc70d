#pragma once

#include <cstdlib>
#include <iostream>
#include <string>
#include <string_view>

namespace minergraph::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

// Verbosity comes from MINERGRAPH_LOG (error|warn|info|debug); default warn.
inline Level threshold() {
  static const Level level = [] {
    const char* env = std::getenv("MINERGRAPH_LOG");
    if (env == nullptr) return Level::warn;
    const std::string_view v(env);
    if (v == "error") return Level::error;
    if (v == "info") return Level::info;
    if (v == "debug") return Level::debug;
    return Level::warn;
  }();
  return level;
}

inline void write(Level level, std::string_view message) {
  if (level > threshold()) return;
  static constexpr std::string_view kNames[] = {"error", "warn", "info", "debug"};
  std::cerr << "minergraph [" << kNames[static_cast<int>(level)] << "] " << message << '\n';
}

inline void error(std::string_view m) { write(Level::error, m); }
inline void warn(std::string_view m) { write(Level::warn, m); }
inline void info(std::string_view m) { write(Level::info, m); }
inline void debug(std::string_view m) { write(Level::debug, m); }

}  // namespace minergraph::log
