#pragma once

#include <stdexcept>
#include <string>

namespace onebit {

// Bad dimensions, bad options, violated preconditions. CLI exit code 1.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values, iteration failures. CLI exit code 2.
struct numerical_error : std::runtime_error {
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Unreadable/unwritable files, malformed documents. CLI exit code 3.
struct io_error : std::runtime_error {
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace onebit
