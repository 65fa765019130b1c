#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace asympode {

enum class ErrorKind {
    // spectral
    NotDiagonalizable,
    NonPositiveSpectrum,
    ComplexSpectrum,
    IndexOutOfRange,
    // termlang
    SyntaxError,
    DegreeError,
    UnsupportedNorm,
    // tensors
    SingularBasePoint,
    OrderOverflow,
    ArityMismatch,
    // exponents
    NotAnEigenvalue,
    EmptyDegreeList,
    // expansion
    MissingPredecessor,
    InapplicableAtXi,
    FiniteModeExceeded,
    // dynamics
    StepFailure,
    InsufficientDecay,
    AmbiguousRate,
    ZeroLimit,
    // report / cli
    ResidualUnderflow,
    IoFailure,
    InvalidInput,
    MissingArtifact,
    Overflow,
};

std::string_view to_string(ErrorKind kind);

/// Every failure surfaced by the library. `kind()` is stable and is what the
/// CLI writes into its error record.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace asympode
