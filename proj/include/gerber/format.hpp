#pragma once

#include <cstdio>
#include <string>

namespace gerber {

// All text output of real values goes through this: 17 significant digits,
// enough for exact double round-trips and byte-stable reruns.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace gerber
