#pragma once

#include <stdexcept>
#include <string>

namespace rainsvm {

enum class ErrorCode {
    invalid_argument,
    missing_file,
    io_error,
    parse_error,
    dimension_mismatch,
    value_out_of_range,
    duplicate_date,
    out_of_bounds,
    too_short,
    empty_input,
    single_class,
    too_large,
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::missing_file: return "missing file";
    case ErrorCode::io_error: return "i/o error";
    case ErrorCode::parse_error: return "parse error";
    case ErrorCode::dimension_mismatch: return "dimension mismatch";
    case ErrorCode::value_out_of_range: return "value out of range";
    case ErrorCode::duplicate_date: return "duplicate date";
    case ErrorCode::out_of_bounds: return "out of bounds";
    case ErrorCode::too_short: return "series too short";
    case ErrorCode::empty_input: return "empty input";
    case ErrorCode::single_class: return "single class";
    case ErrorCode::too_large: return "instance too large";
    }
    return "unknown error";
}

/// All library failures are reported as rainsvm::Error; code() identifies the
/// violated precondition so callers and tests can branch on it.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace rainsvm
