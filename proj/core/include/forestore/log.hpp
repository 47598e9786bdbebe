#pragma once

#include <functional>
#include <string_view>

namespace forestore {

enum class LogLevel { kInfo, kWarning };

using LogSink = std::function<void(LogLevel, std::string_view)>;

// Replaces the process-wide sink and returns the previous one. The default
// sink writes warnings to stderr and drops info messages.
LogSink set_log_sink(LogSink sink);

void log_info(std::string_view message);
void log_warning(std::string_view message);

}  // namespace forestore
