#pragma once

#include <stdexcept>
#include <string>

namespace edastress {

// Error categories map onto the CLI exit-code contract:
// usage -> 2, data -> 3, protocol (training/statistics) -> 4.
enum class ErrorKind { usage, data, protocol };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

    int exit_code() const {
        switch (kind_) {
        case ErrorKind::usage: return 2;
        case ErrorKind::data: return 3;
        case ErrorKind::protocol: return 4;
        }
        return 1;
    }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void throw_usage(const std::string& msg) { throw Error(ErrorKind::usage, msg); }
[[noreturn]] inline void throw_data(const std::string& msg) { throw Error(ErrorKind::data, msg); }
[[noreturn]] inline void throw_protocol(const std::string& msg) { throw Error(ErrorKind::protocol, msg); }

} // namespace edastress
