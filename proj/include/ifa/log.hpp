#pragma once

#include <string>

namespace ifa {

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

// Verbosity is controlled by the IFA_LOG environment variable
// (debug|info|warn|error|off); default is warn.
LogLevel log_level();
void set_log_level(LogLevel lv);

void log_message(LogLevel lv, const std::string& msg);

inline void log_debug(const std::string& m) { log_message(LogLevel::debug, m); }
inline void log_info(const std::string& m) { log_message(LogLevel::info, m); }
inline void log_warn(const std::string& m) { log_message(LogLevel::warn, m); }

}  // namespace ifa
