#pragma once

namespace ncac {
inline constexpr const char* kVersion = "0.1.0";
}
