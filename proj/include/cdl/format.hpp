// Number and CSV formatting helpers shared across the I/O paths.
#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

namespace cdl::detail {

// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double x) {
    char buf[64];
    for (int prec = 1; prec < 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x) return buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') { out.push_back(cur); cur.clear(); }
        else if (c != '\r') cur.push_back(c);
    }
    out.push_back(cur);
    return out;
}

}  // namespace cdl::detail
