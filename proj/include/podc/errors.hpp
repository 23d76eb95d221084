#pragma once

#include <stdexcept>
#include <string>

namespace podc {

// Bad or inconsistent user input (config file, CLI flags, invalid states).
// The CLI maps this to exit code 2.
class config_error : public std::runtime_error {
  public:
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A solver or integrator failed to converge. CLI exit code 3.
class numeric_error : public std::runtime_error {
  public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace podc
