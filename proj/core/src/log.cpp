#include "neurolabel/log.hpp"

#include <cstdio>
#include <mutex>

namespace nlab {

namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

LogSink& sink() {
  static LogSink s = [](LogLevel level, std::string_view message) {
    if (level == LogLevel::warning) {
      std::fprintf(stderr, "warning: %.*s\n", static_cast<int>(message.size()), message.data());
    }
  };
  return s;
}

}  // namespace

void set_log_sink(LogSink s) {
  std::lock_guard lock(sink_mutex());
  sink() = std::move(s);
}

void log_message(LogLevel level, std::string_view message) {
  std::lock_guard lock(sink_mutex());
  if (sink()) sink()(level, message);
}

}  // namespace nlab
