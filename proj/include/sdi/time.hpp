#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace sdi {

/// UTC instant with one-second resolution.
using Timestamp = std::chrono::sys_seconds;

/// Current UTC time truncated to whole seconds.
Timestamp now_utc();

/// "YYYY-MM-DDTHH:MM:SSZ".
std::string format_iso8601(Timestamp t);

/// Strict inverse of format_iso8601. Returns nullopt on any deviation.
std::optional<Timestamp> parse_iso8601(std::string_view text);

}  // namespace sdi
