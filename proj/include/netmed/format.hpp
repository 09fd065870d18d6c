#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace netmed {

/// Shortest decimal text that round-trips to the same double.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "NA";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline constexpr int kSchemaVersion = 1;

/// First line of every CSV the tools write; readers skip '#' lines.
inline std::string csv_schema_line() { return "# netmed-schema: " + std::to_string(kSchemaVersion) + "\n"; }

}  // namespace netmed
