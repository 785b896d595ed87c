#pragma once

#include <stdexcept>
#include <string>

namespace recurmix {

// Bad user input: malformed files, inconsistent dimensions, invalid
// configuration. The CLI maps this to exit code 2.
class input_error : public std::runtime_error {
public:
    explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

// Estimation failed (all restarts degenerate, overflowing parameters,
// monotonicity violation). The CLI maps this to exit code 3.
class fit_error : public std::runtime_error {
public:
    explicit fit_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace recurmix
