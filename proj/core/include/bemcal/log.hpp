#pragma once

#include <string_view>

namespace bemcal {

enum class LogLevel { Quiet, Warning, Info };

/// Process-wide verbosity; defaults to Warning.
void set_log_level(LogLevel level);
LogLevel log_level();

void log_warning(std::string_view message);
void log_info(std::string_view message);

}  // namespace bemcal
