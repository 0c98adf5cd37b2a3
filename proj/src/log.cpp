#include "jic/log.hpp"

namespace jic::log {

namespace {
std::mutex g_mutex;

const char* tag(Level level) {
    switch (level) {
        case Level::debug: return "debug";
        case Level::info: return "info";
        case Level::warn: return "warn";
        case Level::error: return "error";
        default: return "?";
    }
}
}  // namespace

Level& threshold() {
    static Level level = Level::warn;
    return level;
}

void write(Level level, std::string_view msg) {
    if (static_cast<int>(level) < static_cast<int>(threshold())) return;
    std::lock_guard<std::mutex> lock(g_mutex);
    std::cerr << "[" << tag(level) << "] " << msg << "\n";
}

std::string truncate_body(std::string_view body, size_t max_bytes) {
    if (body.size() <= max_bytes) return std::string(body);
    return std::string(body.substr(0, max_bytes)) + "...<truncated " +
           std::to_string(body.size() - max_bytes) + " bytes>";
}

}  // namespace jic::log
