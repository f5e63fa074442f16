#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace topoguard {

enum class ErrorKind {
    DegenerateInput,
    OutsideHull,
    CoincidentPoint,
    SamplingFailed,
    TooLarge,
    InvalidFiltration,
    DimensionMismatch,
    InfiniteMismatch,
    EmptyAfterTrim,
    ParseError,
    TooFewPoints,
    NoTraces,
    InvalidArgument,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::DegenerateInput: return "DegenerateInput";
        case ErrorKind::OutsideHull: return "OutsideHull";
        case ErrorKind::CoincidentPoint: return "CoincidentPoint";
        case ErrorKind::SamplingFailed: return "SamplingFailed";
        case ErrorKind::TooLarge: return "TooLarge";
        case ErrorKind::InvalidFiltration: return "InvalidFiltration";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::InfiniteMismatch: return "InfiniteMismatch";
        case ErrorKind::EmptyAfterTrim: return "EmptyAfterTrim";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::TooFewPoints: return "TooFewPoints";
        case ErrorKind::NoTraces: return "NoTraces";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the ErrorKind tags so
/// callers (and the CLI's exit-code mapping) can branch on it.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace topoguard
