#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace apm {

enum class ErrorKind { Parse, Validation, Config, Numeric, Io };

/// Library-wide exception; `kind()` drives CLI exit codes and messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    const char* kind_name() const noexcept {
        switch (kind_) {
            case ErrorKind::Parse: return "parse";
            case ErrorKind::Validation: return "validation";
            case ErrorKind::Config: return "config";
            case ErrorKind::Numeric: return "numeric";
            case ErrorKind::Io: return "io";
        }
        return "unknown";
    }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void throw_parse(std::size_t line, const std::string& field,
                                     const std::string& what) {
    throw Error(ErrorKind::Parse,
                "line " + std::to_string(line) + ", field '" + field + "': " + what);
}

[[noreturn]] inline void throw_validation(std::size_t line, const std::string& what) {
    throw Error(ErrorKind::Validation, "line " + std::to_string(line) + ": " + what);
}

}  // namespace apm
