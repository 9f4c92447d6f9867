#pragma once

#include <stdexcept>
#include <string>

namespace rowpip {

// Error categories map 1:1 onto CLI exit codes (see tools/rowpip_main.cpp):
// config -> 2, data -> 3, internal -> 4.
enum class ErrorKind { config, data, internal };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(ErrorKind::config, msg) {}
};

// Bad input content: malformed files, shape mismatches, NaNs, domain violations.
class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error(ErrorKind::data, msg) {}
};

// A broken internal invariant; always a bug, never user-correctable.
class InternalError : public Error {
public:
    explicit InternalError(const std::string& msg) : Error(ErrorKind::internal, msg) {}
};

}  // namespace rowpip
