#pragma once

#include <stdexcept>
#include <string>

namespace osmt {

// Invalid configuration (bad field values, duplicate camera registration).
// The CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or inconsistent input data (parse failures, order violations,
// misaligned outcome/event files, bad snapshots). CLI exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace osmt
