#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace epiwave {

enum class ErrorCode {
    NonCommensurate,
    InvalidSize,
    OutOfRange,
    ShapeMismatch,
    LengthMismatch,
    MissingSlope,
    SingularSystem,
    NonFinite,
    SingularSigma,
    SingularBirthSystem,
    PicardDiverged,
    InvalidParam,
    FitUnderdetermined,
    MissingBaseline,
    IoError,
    ConfigError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so that
// callers (the CLI in particular) can map them onto exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NonCommensurate: return "NonCommensurate";
        case ErrorCode::InvalidSize: return "InvalidSize";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::MissingSlope: return "MissingSlope";
        case ErrorCode::SingularSystem: return "SingularSystem";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::SingularSigma: return "SingularSigma";
        case ErrorCode::SingularBirthSystem: return "SingularBirthSystem";
        case ErrorCode::PicardDiverged: return "PicardDiverged";
        case ErrorCode::InvalidParam: return "InvalidParam";
        case ErrorCode::FitUnderdetermined: return "FitUnderdetermined";
        case ErrorCode::MissingBaseline: return "MissingBaseline";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

}  // namespace epiwave
