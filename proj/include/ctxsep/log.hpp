#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

namespace ctxsep {

// Verbosity comes from the CTXSEP_LOG environment variable:
// unset/0 = warnings only, 1 = info, 2 = debug. Messages go to stderr so
// stdout stays reserved for machine-readable output.
inline int log_level() {
    static const int level = [] {
        const char* env = std::getenv("CTXSEP_LOG");
        return env ? std::atoi(env) : 0;
    }();
    return level;
}

template <typename... Args>
void log_info(const char* fmt, Args... args) {
    if (log_level() >= 1) {
        std::fprintf(stderr, "[ctxsep] ");
        if constexpr (sizeof...(args) == 0) {
            std::fprintf(stderr, "%s", fmt);
        } else {
            std::fprintf(stderr, fmt, args...);
        }
        std::fprintf(stderr, "\n");
    }
}

template <typename... Args>
void log_debug(const char* fmt, Args... args) {
    if (log_level() >= 2) {
        std::fprintf(stderr, "[ctxsep:debug] ");
        if constexpr (sizeof...(args) == 0) {
            std::fprintf(stderr, "%s", fmt);
        } else {
            std::fprintf(stderr, fmt, args...);
        }
        std::fprintf(stderr, "\n");
    }
}

template <typename... Args>
void log_warn(const char* fmt, Args... args) {
    std::fprintf(stderr, "[ctxsep:warn] ");
    if constexpr (sizeof...(args) == 0) {
        std::fprintf(stderr, "%s", fmt);
    } else {
        std::fprintf(stderr, fmt, args...);
    }
    std::fprintf(stderr, "\n");
}

}  // namespace ctxsep
