#pragma once

#include "asympode/termlang.hpp"

#include <map>
#include <string>
#include <string_view>

namespace asympode {

struct ParseOptions {
    /// State dimension d; 0 infers it from the highest x_i index (default 1).
    int dim = 0;
    std::map<std::string, Rational> params;
    SpecMode mode = SpecMode::Infinite;
    Rational remainder_exponent;
    /// Reject odd or non-integer norm indices (UnsupportedNorm).
    bool require_smooth_norms = false;
};

/// Parses the nonlinearity grammar:
///   vectors     [e1, ..., ed], x, {{..},{..}}*x
///   factors     normP(v)^{q}, norm_{p}(v)^{q}, abs(x_i)^{q}, sgnpow(x_i, q), x_i^n,
///               polynormP(P1, ..., Pn)^{q}, polynorm_{p}(...)^{q}
///   composites  comp(numerator; denominator; depth)
/// with + - * /, parentheses, rational literals and named parameters.
/// Throws Error(SyntaxError) with line and column on malformed input and
/// Error(DegreeError) when a homogeneous degree is <= 1.
NonlinearitySpec parse_nonlinearity(std::string_view source, const ParseOptions& options);

/// Rational constant expression ("3/2", "a+1/4") under the given parameters.
Rational parse_constant(std::string_view source, const std::map<std::string, Rational>& params = {});

}  // namespace asympode
