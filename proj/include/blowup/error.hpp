#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace blowup {

enum class ErrorCode {
    InvalidArgument,
    OutOfDomain,
    InconclusiveTail,
    Unbounded,
    PossiblyUnboundedBox,
    NotConvex,
    NeverPositive,
    ConditionFailed,
    RootBracketFailed,
    OutOfRange,
    EmptyDomain,
    ExceedsBBox,
    NewtonDiverged,
    UnresolvedBoundary,
    LadderNotConverged,
    TopologyFailed,
    StepDiverged,
    GridMismatch,
    FloorUndefined,
    WrongLadder,
    HorizonTooShort,
    HypothesisFailed,
    ConfigInvalid,
};

inline std::string_view to_string(ErrorCode c)
{
    switch (c) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::InconclusiveTail: return "InconclusiveTail";
    case ErrorCode::Unbounded: return "Unbounded";
    case ErrorCode::PossiblyUnboundedBox: return "PossiblyUnboundedBox";
    case ErrorCode::NotConvex: return "NotConvex";
    case ErrorCode::NeverPositive: return "NeverPositive";
    case ErrorCode::ConditionFailed: return "ConditionFailed";
    case ErrorCode::RootBracketFailed: return "RootBracketFailed";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::EmptyDomain: return "EmptyDomain";
    case ErrorCode::ExceedsBBox: return "ExceedsBBox";
    case ErrorCode::NewtonDiverged: return "NewtonDiverged";
    case ErrorCode::UnresolvedBoundary: return "UnresolvedBoundary";
    case ErrorCode::LadderNotConverged: return "LadderNotConverged";
    case ErrorCode::TopologyFailed: return "TopologyFailed";
    case ErrorCode::StepDiverged: return "StepDiverged";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::FloorUndefined: return "FloorUndefined";
    case ErrorCode::WrongLadder: return "WrongLadder";
    case ErrorCode::HorizonTooShort: return "HorizonTooShort";
    case ErrorCode::HypothesisFailed: return "HypothesisFailed";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    }
    return "Unknown";
}

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

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

} // namespace blowup
