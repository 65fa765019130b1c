#include "asympode/error.hpp"

namespace asympode {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::NotDiagonalizable: return "NotDiagonalizable";
        case ErrorKind::NonPositiveSpectrum: return "NonPositiveSpectrum";
        case ErrorKind::ComplexSpectrum: return "ComplexSpectrum";
        case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorKind::SyntaxError: return "SyntaxError";
        case ErrorKind::DegreeError: return "DegreeError";
        case ErrorKind::UnsupportedNorm: return "UnsupportedNorm";
        case ErrorKind::SingularBasePoint: return "SingularBasePoint";
        case ErrorKind::OrderOverflow: return "OrderOverflow";
        case ErrorKind::ArityMismatch: return "ArityMismatch";
        case ErrorKind::NotAnEigenvalue: return "NotAnEigenvalue";
        case ErrorKind::EmptyDegreeList: return "EmptyDegreeList";
        case ErrorKind::MissingPredecessor: return "MissingPredecessor";
        case ErrorKind::InapplicableAtXi: return "InapplicableAtXi";
        case ErrorKind::FiniteModeExceeded: return "FiniteModeExceeded";
        case ErrorKind::StepFailure: return "StepFailure";
        case ErrorKind::InsufficientDecay: return "InsufficientDecay";
        case ErrorKind::AmbiguousRate: return "AmbiguousRate";
        case ErrorKind::ZeroLimit: return "ZeroLimit";
        case ErrorKind::ResidualUnderflow: return "ResidualUnderflow";
        case ErrorKind::IoFailure: return "IoFailure";
        case ErrorKind::InvalidInput: return "InvalidInput";
        case ErrorKind::MissingArtifact: return "MissingArtifact";
        case ErrorKind::Overflow: return "Overflow";
    }
    return "Unknown";
}

}  // namespace asympode
