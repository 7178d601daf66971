#ifndef RDMD_ERROR_HPP
#define RDMD_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace rdmd {

enum class ErrorCode {
    InsufficientSnapshots,
    InvalidData,
    ShapeMismatch,
    FormatError,
    InvalidParameter,
    NumericalFailure,
    PathError,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InsufficientSnapshots: return "InsufficientSnapshots";
    case ErrorCode::InvalidData: return "InvalidData";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::PathError: return "PathError";
    }
    return "Unknown";
}

/// Exception carrying one of the library's error categories.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

namespace detail {

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

inline void require(bool condition, ErrorCode code, const std::string& what) {
    if (!condition) fail(code, what);
}

} // namespace detail
} // namespace rdmd

#endif
