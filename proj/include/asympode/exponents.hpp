#pragma once

#include "asympode/rational.hpp"
#include "asympode/spectral.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace asympode {

struct Generator {
    enum Kind { EigenGap, Degree };
    Kind kind = EigenGap;
    /// Distinct-eigenvalue index (EigenGap) or component index (Degree), 0-based.
    int index = 0;
    Rational value;
    /// Source quantity: lambda_k (EigenGap) or alpha_j (Degree).
    Rational source;
    std::string label() const;
};

struct LatticeElement {
    Rational tilde;  // mu~_n
    Rational mu;     // mu_n = mu~_n + lambda*
    /// Generator multiplicity vectors summing to `tilde`.
    std::vector<std::vector<int>> decompositions;
    bool decompositions_truncated = false;
};

struct ExponentLattice {
    Rational lambda_star;
    int n0 = 0;
    std::vector<Generator> generators;
    std::vector<LatticeElement> elements;
    /// The set has fewer elements than requested (no degree generators and few gaps).
    bool finite = false;

    int size() const { return static_cast<int>(elements.size()); }
    Rational window_max() const { return elements.empty() ? Rational(0) : elements.back().tilde; }
    /// 0-based index of mu~ in the lattice, or -1.
    int index_of_tilde(const Rational& tilde) const;
};

/// alpha_j for j = 0, 1, ... (nullopt once exhausted). Must be strictly increasing and positive.
using DegreeSource = std::function<std::optional<Rational>(int)>;

DegreeSource finite_degrees(std::vector<Rational> alphas);

/// The `count` smallest elements of the rate lattice with all generator decompositions.
/// Throws NotAnEigenvalue, EmptyDegreeList (rule source yielding nothing).
ExponentLattice build_lattice(const SpectralData& sd, const Rational& lambda_star, const DegreeSource& alphas,
                              int count, bool rule_generated = false);

ExponentLattice build_lattice(const SpectralData& sd, const Rational& lambda_star,
                              const std::vector<Rational>& alphas, int count);

/// First `count` elements of S' = { sum of n >= 1 eigenvalues + m alpha1 lambda_1 }.
std::vector<Rational> candidate_rates(const SpectralData& sd, const Rational& alpha1, int count);

}  // namespace asympode
