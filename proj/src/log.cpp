#include "ifa/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace ifa {

namespace {

LogLevel parse_env_level() {
  const char* v = std::getenv("IFA_LOG");
  if (v == nullptr) return LogLevel::warn;
  if (std::strcmp(v, "debug") == 0) return LogLevel::debug;
  if (std::strcmp(v, "info") == 0) return LogLevel::info;
  if (std::strcmp(v, "warn") == 0) return LogLevel::warn;
  if (std::strcmp(v, "error") == 0) return LogLevel::error;
  if (std::strcmp(v, "off") == 0) return LogLevel::off;
  return LogLevel::warn;
}

LogLevel& level_ref() {
  static LogLevel lv = parse_env_level();
  return lv;
}

const char* level_name(LogLevel lv) {
  switch (lv) {
    case LogLevel::debug: return "debug";
    case LogLevel::info: return "info";
    case LogLevel::warn: return "warn";
    case LogLevel::error: return "error";
    default: return "off";
  }
}

}  // namespace

LogLevel log_level() { return level_ref(); }
void set_log_level(LogLevel lv) { level_ref() = lv; }

void log_message(LogLevel lv, const std::string& msg) {
  if (lv < level_ref()) return;
  std::fprintf(stderr, "[ifa] %s: %s\n", level_name(lv), msg.c_str());
}

}  // namespace ifa
