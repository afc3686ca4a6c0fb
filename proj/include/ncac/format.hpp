#pragma once

#include <cstdio>
#include <string>

namespace ncac {

// All floating-point values in result files go through this: 12 significant
// digits, shortest form ("%.12g"), so reruns are byte-comparable.
inline std::string fmt12(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

} // namespace ncac
