// Round-trip decimal formatting for emitted numbers.
#pragma once

#include <charconv>
#include <string>

namespace dweit {

/// 17 significant digits, shortest exponent form; exact for any double.
inline std::string format_number(double value)
{
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
    return std::string(buf, result.ptr);
}

}  // namespace dweit
