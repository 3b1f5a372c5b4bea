#pragma once

#include <stdexcept>
#include <string>

namespace ffradon {

enum class Errc {
    NotPrime,
    ReducibleModulus,
    SizeCapExceeded,
    DivisionByZero,
    DimensionMismatch,
    EmptyInput,
    BadExponent,
    ZeroFunction,
    EmptySet,
    TooFewPoints,
    InfeasibleLevels,
    TooLargeExact,
    ParseError,
    OutOfSquare,
    BadConfig,
};

/// Library error carrying a machine-checkable code alongside the message.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& msg) { throw Error(code, msg); }

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::NotPrime: return "NotPrime";
        case Errc::ReducibleModulus: return "ReducibleModulus";
        case Errc::SizeCapExceeded: return "SizeCapExceeded";
        case Errc::DivisionByZero: return "DivisionByZero";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::EmptyInput: return "EmptyInput";
        case Errc::BadExponent: return "BadExponent";
        case Errc::ZeroFunction: return "ZeroFunction";
        case Errc::EmptySet: return "EmptySet";
        case Errc::TooFewPoints: return "TooFewPoints";
        case Errc::InfeasibleLevels: return "InfeasibleLevels";
        case Errc::TooLargeExact: return "TooLargeExact";
        case Errc::ParseError: return "ParseError";
        case Errc::OutOfSquare: return "OutOfSquare";
        case Errc::BadConfig: return "BadConfig";
    }
    return "Unknown";
}

} // namespace ffradon
