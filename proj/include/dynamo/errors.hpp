#pragma once

#include <stdexcept>
#include <string>

namespace dynamo {

// Structured failure kinds. Every throw in the library carries one of these so
// callers (and the CLI exit-code mapping) can branch without string matching.
enum class Err {
    NonzeroMean,
    NotDivergenceFree,
    NotReal,
    TruncationMismatch,
    BoxMismatch,
    DegenerateInput,
    SolverDiverged,
    NoConvergence,
    DerivativeVanished,
    NoUnstableDirection,
    SnapDestroyedGrowth,
    EigenvectorMismatch,
    StabilityViolation,
    NanDetected,
    HorizonExceeded,
    IoError,
    BadConfig,
};

inline const char* err_name(Err e) {
    switch (e) {
        case Err::NonzeroMean: return "NonzeroMean";
        case Err::NotDivergenceFree: return "NotDivergenceFree";
        case Err::NotReal: return "NotReal";
        case Err::TruncationMismatch: return "TruncationMismatch";
        case Err::BoxMismatch: return "BoxMismatch";
        case Err::DegenerateInput: return "DegenerateInput";
        case Err::SolverDiverged: return "SolverDiverged";
        case Err::NoConvergence: return "NoConvergence";
        case Err::DerivativeVanished: return "DerivativeVanished";
        case Err::NoUnstableDirection: return "NoUnstableDirection";
        case Err::SnapDestroyedGrowth: return "SnapDestroyedGrowth";
        case Err::EigenvectorMismatch: return "EigenvectorMismatch";
        case Err::StabilityViolation: return "StabilityViolation";
        case Err::NanDetected: return "NanDetected";
        case Err::HorizonExceeded: return "HorizonExceeded";
        case Err::IoError: return "IoError";
        case Err::BadConfig: return "BadConfig";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
  public:
    Error(Err kind, const std::string& what)
        : std::runtime_error(std::string(err_name(kind)) + ": " + what), kind_(kind) {}

    Err kind() const { return kind_; }

  private:
    Err kind_;
};

[[noreturn]] inline void fail(Err kind, const std::string& what) { throw Error(kind, what); }

}  // namespace dynamo
