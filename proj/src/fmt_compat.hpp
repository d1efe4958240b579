#pragma once

#include <charconv>
#include <string>

namespace effc {

/// Shortest round-trip decimal form of a double; locale-independent.
inline std::string format_double(double x) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

}  // namespace effc
