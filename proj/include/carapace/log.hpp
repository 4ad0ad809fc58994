#pragma once

#include <cstdlib>
#include <memory>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace carapace {

/// Library logger on stderr. Verbosity comes from CARAPACE_LOG
/// (trace|debug|info|warn|error|off); default warn.
inline spdlog::logger &log() {
    static std::shared_ptr<spdlog::logger> logger = [] {
        auto l = spdlog::stderr_color_mt("carapace");
        l->set_pattern("[%l] %v");
        auto level = spdlog::level::warn;
        if (const char *env = std::getenv("CARAPACE_LOG"))
            level = spdlog::level::from_str(env);
        l->set_level(level);
        return l;
    }();
    return *logger;
}

} // namespace carapace
