#pragma once

#include <functional>
#include <string_view>

namespace nlab {

enum class LogLevel { info, warning };

using LogSink = std::function<void(LogLevel, std::string_view)>;

/// Replaces the process-wide sink (default: warnings to stderr, info dropped).
void set_log_sink(LogSink sink);
void log_message(LogLevel level, std::string_view message);
inline void log_warning(std::string_view message) { log_message(LogLevel::warning, message); }
inline void log_info(std::string_view message) { log_message(LogLevel::info, message); }

}  // namespace nlab
