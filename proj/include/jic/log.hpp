#pragma once

#include <iostream>
#include <mutex>
#include <string>
#include <string_view>

namespace jic::log {

enum class Level { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

Level& threshold();

void write(Level level, std::string_view msg);

inline void debug(std::string_view msg) { write(Level::debug, msg); }
inline void info(std::string_view msg) { write(Level::info, msg); }
inline void warn(std::string_view msg) { write(Level::warn, msg); }
inline void error(std::string_view msg) { write(Level::error, msg); }

// Request/response bodies are only logged at debug verbosity and truncated
// to 2 KiB.
std::string truncate_body(std::string_view body, size_t max_bytes = 2048);

}  // namespace jic::log
