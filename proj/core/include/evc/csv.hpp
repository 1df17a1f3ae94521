#pragma once

#include <cstdio>
#include <string>

namespace evc::csv {

/// Six significant digits, locale-independent ("%.6g").
inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace evc::csv
