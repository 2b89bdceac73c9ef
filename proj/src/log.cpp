#include "gnssgnc/log.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace gnssgnc::log {

Level level() {
    static Level lvl = [] {
        const char* env = std::getenv("LOG_LEVEL");
        if (env == nullptr) return Level::kWarn;
        if (std::strcmp(env, "error") == 0) return Level::kError;
        if (std::strcmp(env, "warn") == 0) return Level::kWarn;
        if (std::strcmp(env, "info") == 0) return Level::kInfo;
        if (std::strcmp(env, "debug") == 0) return Level::kDebug;
        return Level::kWarn;
    }();
    return lvl;
}

static void emit(Level lvl, const char* tag, const std::string& msg) {
    if (static_cast<int>(lvl) <= static_cast<int>(level())) {
        std::fprintf(stderr, "[%s] %s\n", tag, msg.c_str());
    }
}

void error(const std::string& msg) { emit(Level::kError, "error", msg); }
void warn(const std::string& msg) { emit(Level::kWarn, "warn", msg); }
void info(const std::string& msg) { emit(Level::kInfo, "info", msg); }
void debug(const std::string& msg) { emit(Level::kDebug, "debug", msg); }

}  // namespace gnssgnc::log
