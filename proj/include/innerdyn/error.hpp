#pragma once
#include <stdexcept>
#include <string>

namespace innerdyn {

// Bad parameters, malformed configs, out-of-contract arguments.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// A computation that started from valid inputs but could not be completed
// or certified (divergent iteration, obstructed continuation, ...).
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace innerdyn
