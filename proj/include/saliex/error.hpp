#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace saliex {

enum class ErrorCode {
    InvalidDimension,
    DimensionMismatch,
    InvalidRegion,
    InvalidValue,
    ImageTooSmall,
    NotNeighbors,
    InvalidShift,
    EmptyMask,
    EmptyDataset,
    ParseError,
    IoError,
    ConfigError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidDimension: return "InvalidDimension";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidRegion: return "InvalidRegion";
    case ErrorCode::InvalidValue: return "InvalidValue";
    case ErrorCode::ImageTooSmall: return "ImageTooSmall";
    case ErrorCode::NotNeighbors: return "NotNeighbors";
    case ErrorCode::InvalidShift: return "InvalidShift";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace saliex
