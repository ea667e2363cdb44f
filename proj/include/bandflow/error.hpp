#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bandflow {

enum class ErrorCode {
    InvalidArgument,
    GridMismatch,
    InsufficientCoverage,
    InsufficientPadding,
    NyquistViolation,
    KernelTooWide,
    EmptyBand,
    BandCoverage,
    ValueBound,
    QuadratureDiverged,
    ConfigParse,
    ConfigMissingKey,
    ManifestMismatch,
    Io,
};

std::string_view to_string(ErrorCode code);

/// Structured error raised by every precondition check in the library.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace bandflow
