#pragma once

#include <stdexcept>
#include <string>

namespace mids {

enum class ErrorCode {
    NonStochasticRow,
    BadSusceptibility,
    DimensionMismatch,
    NonFiniteEntry,
    NotSubstochastic,
    NotStochastic,
    NotRegular,
    NoConvergence,
    NotConvergent,
    SingularSystem,
    ObliviousAgentsPresent,
    NonStochasticC,
    InvalidGossipConfig,
    CorollaryConditionsViolated,
    InfeasibleConstraintSet,
    InvalidArgument,
    ParseError,
};

[[nodiscard]] constexpr const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NonStochasticRow: return "NonStochasticRow";
        case ErrorCode::BadSusceptibility: return "BadSusceptibility";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NonFiniteEntry: return "NonFiniteEntry";
        case ErrorCode::NotSubstochastic: return "NotSubstochastic";
        case ErrorCode::NotStochastic: return "NotStochastic";
        case ErrorCode::NotRegular: return "NotRegular";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::NotConvergent: return "NotConvergent";
        case ErrorCode::SingularSystem: return "SingularSystem";
        case ErrorCode::ObliviousAgentsPresent: return "ObliviousAgentsPresent";
        case ErrorCode::NonStochasticC: return "NonStochasticC";
        case ErrorCode::InvalidGossipConfig: return "InvalidGossipConfig";
        case ErrorCode::CorollaryConditionsViolated: return "CorollaryConditionsViolated";
        case ErrorCode::InfeasibleConstraintSet: return "InfeasibleConstraintSet";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

/// Single exception type for the library; `code()` tells callers what failed.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace mids
