#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

// Stderr logging gated by the MOVAC_LOG environment variable
// (error | info | debug, default info).
namespace movac::log {

enum class Level { kError = 0, kInfo = 1, kDebug = 2 };

inline Level level() {
    static const Level cached = [] {
        const char* raw = std::getenv("MOVAC_LOG");
        if (raw == nullptr) return Level::kInfo;
        if (std::strcmp(raw, "error") == 0) return Level::kError;
        if (std::strcmp(raw, "debug") == 0) return Level::kDebug;
        return Level::kInfo;
    }();
    return cached;
}

inline void error(const std::string& msg) { std::fprintf(stderr, "[error] %s\n", msg.c_str()); }

inline void info(const std::string& msg) {
    if (level() >= Level::kInfo) std::fprintf(stderr, "[info] %s\n", msg.c_str());
}

inline void debug(const std::string& msg) {
    if (level() >= Level::kDebug) std::fprintf(stderr, "[debug] %s\n", msg.c_str());
}

}  // namespace movac::log
