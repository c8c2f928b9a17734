#pragma once

#include <stdexcept>
#include <string>

namespace orbitscope {

enum class Errc {
    // group_core
    DimensionMismatch,
    NonInvertibleGenerator,
    OrderCapExceeded,
    NotASubgroup,
    SubgroupCapExceeded,
    // poly_core
    KindMismatch,
    ParseError,
    // invariants
    CapTooLow,
    NotInvariant,
    NotExpressible,
    // strata
    NoUniqueMinimum,
    // landau
    NoConvergence,
    StabilityViolation,
    AmbiguousClassification,
    UnknownParameter,
    // reduction
    SingularHomologicalSolve,
    VerificationFailed,
    InvalidPotential,
    // dynamics
    NonFiniteState,
    MonotonicityViolation,
    // cli
    InvalidArgument,
    IoError,
};

inline const char* module_of(Errc code) {
    switch (code) {
    case Errc::DimensionMismatch:
    case Errc::NonInvertibleGenerator:
    case Errc::OrderCapExceeded:
    case Errc::NotASubgroup:
    case Errc::SubgroupCapExceeded: return "group_core";
    case Errc::KindMismatch:
    case Errc::ParseError: return "poly_core";
    case Errc::CapTooLow:
    case Errc::NotInvariant:
    case Errc::NotExpressible: return "invariants";
    case Errc::NoUniqueMinimum: return "strata";
    case Errc::NoConvergence:
    case Errc::StabilityViolation:
    case Errc::AmbiguousClassification:
    case Errc::UnknownParameter: return "landau";
    case Errc::SingularHomologicalSolve:
    case Errc::VerificationFailed:
    case Errc::InvalidPotential: return "reduction";
    case Errc::NonFiniteState:
    case Errc::MonotonicityViolation: return "dynamics";
    case Errc::InvalidArgument:
    case Errc::IoError: return "cli";
    }
    return "unknown";
}

inline const char* name_of(Errc code) {
    switch (code) {
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NonInvertibleGenerator: return "NonInvertibleGenerator";
    case Errc::OrderCapExceeded: return "OrderCapExceeded";
    case Errc::NotASubgroup: return "NotASubgroup";
    case Errc::SubgroupCapExceeded: return "SubgroupCapExceeded";
    case Errc::KindMismatch: return "KindMismatch";
    case Errc::ParseError: return "ParseError";
    case Errc::CapTooLow: return "CapTooLow";
    case Errc::NotInvariant: return "NotInvariant";
    case Errc::NotExpressible: return "NotExpressible";
    case Errc::NoUniqueMinimum: return "NoUniqueMinimum";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::StabilityViolation: return "StabilityViolation";
    case Errc::AmbiguousClassification: return "AmbiguousClassification";
    case Errc::UnknownParameter: return "UnknownParameter";
    case Errc::SingularHomologicalSolve: return "SingularHomologicalSolve";
    case Errc::VerificationFailed: return "VerificationFailed";
    case Errc::InvalidPotential: return "InvalidPotential";
    case Errc::NonFiniteState: return "NonFiniteState";
    case Errc::MonotonicityViolation: return "MonotonicityViolation";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::IoError: return "IoError";
    }
    return "Unknown";
}

/// Every failure in the library surfaces as this exception; `qualified()`
/// gives the module-qualified code used in CLI error records.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(module_of(code)) + "." + name_of(code) + ": " + message),
          code_(code), detail_(message) {}

    Errc code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }
    std::string qualified() const { return std::string(module_of(code_)) + "." + name_of(code_); }

private:
    Errc code_;
    std::string detail_;
};

} // namespace orbitscope
