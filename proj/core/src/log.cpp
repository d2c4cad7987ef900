#include "bemcal/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace bemcal {

namespace {

std::atomic<LogLevel> g_level{LogLevel::Warning};
std::mutex g_mutex;

}  // namespace

void set_log_level(LogLevel level) { g_level = level; }

LogLevel log_level() { return g_level; }

void log_warning(std::string_view message) {
    if (g_level.load() == LogLevel::Quiet) {
        return;
    }
    std::lock_guard lock(g_mutex);
    std::clog << "warning: " << message << '\n';
}

void log_info(std::string_view message) {
    if (g_level.load() != LogLevel::Info) {
        return;
    }
    std::lock_guard lock(g_mutex);
    std::clog << message << '\n';
}

}  // namespace bemcal
