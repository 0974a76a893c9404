#pragma once

#include <stdexcept>
#include <string>

namespace jsar {

enum class ErrorKind {
    InvalidArgument,
    DimensionMismatch,
    Config,
    Parse,
    Io,
    Layout,
    Resource,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "invalid argument";
        case ErrorKind::DimensionMismatch: return "dimension mismatch";
        case ErrorKind::Config: return "config error";
        case ErrorKind::Parse: return "parse error";
        case ErrorKind::Io: return "i/o error";
        case ErrorKind::Layout: return "bad input layout";
        case ErrorKind::Resource: return "missing resource";
    }
    return "error";
}

/// Every failure raised by the library carries a category so frontends can map
/// it to an exit code without parsing the message.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace jsar
