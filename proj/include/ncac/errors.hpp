#pragma once

#include <stdexcept>
#include <string>

namespace ncac {

// Bad input: malformed files, schema violations, out-of-range ids,
// dimension mismatches. The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Request exceeds a documented hard cap (state spaces grow as 2^n).
// The CLI maps this to exit code 3; the message names the blown budget.
struct CapacityError : std::runtime_error {
    explicit CapacityError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace ncac
