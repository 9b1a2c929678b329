// Error type shared by every dweit module.
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dweit {

enum class ErrorCode {
    NonPositiveRate,
    NonFinite,
    NegativeTunneling,
    UnknownKey,
    BadConfig,
    DegenerateSubspace,
    SingularSystem,
    PoleEncountered,
    NotDegenerate,
    UnphysicalIndex,
    StepTooLarge,
    UnresolvedFeature,
    StepUnstable,
    NotConverged,
    InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::NonPositiveRate: return "NonPositiveRate";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NegativeTunneling: return "NegativeTunneling";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::DegenerateSubspace: return "DegenerateSubspace";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::PoleEncountered: return "PoleEncountered";
    case ErrorCode::NotDegenerate: return "NotDegenerate";
    case ErrorCode::UnphysicalIndex: return "UnphysicalIndex";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::UnresolvedFeature: return "UnresolvedFeature";
    case ErrorCode::StepUnstable: return "StepUnstable";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

/// Exception carrying a machine-readable code. The code's name doubles as
/// the error token written by the CLI.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

}  // namespace dweit
