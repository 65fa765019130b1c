#pragma once

#include "asympode/linalg.hpp"
#include "asympode/rational.hpp"

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace asympode {

using Monomial = std::vector<int>;

/// Multivariate polynomial in d variables with float coefficients.
class ScalarPoly {
public:
    ScalarPoly() = default;
    explicit ScalarPoly(int dim) : dim_(dim) {}
    static ScalarPoly constant(int dim, double c);
    static ScalarPoly variable(int dim, int i);

    int dim() const { return dim_; }
    const std::map<Monomial, double>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    /// Total degree; -1 for the zero polynomial.
    int degree() const;
    bool is_homogeneous() const;
    std::optional<double> as_constant() const;

    void add_term(const Monomial& m, double c);
    double eval(const Vec& x) const;

    ScalarPoly operator+(const ScalarPoly& o) const;
    ScalarPoly operator-(const ScalarPoly& o) const;
    ScalarPoly operator*(const ScalarPoly& o) const;
    ScalarPoly operator*(double c) const;
    ScalarPoly pow(int n) const;
    ScalarPoly derivative(int i) const;

    bool operator==(const ScalarPoly& o) const { return dim_ == o.dim_ && terms_ == o.terms_; }
    bool operator<(const ScalarPoly& o) const { return terms_ < o.terms_; }

    std::string str() const;

private:
    int dim_ = 0;
    std::map<Monomial, double> terms_;
};

/// ||M x||_p^nu. An empty M means the identity.
struct NormPower {
    Mat matrix;
    Rational p;
    Rational nu;
};

enum class SignType { Abs, Signed };

/// |x_i|^gamma (Abs) or |x_i|^gamma sign(x_i) (Signed). i is 0-based.
/// Plain integer powers live in the polynomial part of a term.
struct CoordPower {
    int index = 0;
    SignType type = SignType::Abs;
    Rational gamma;
};

/// ||P(x)||_p^nu for a vector P of homogeneous polynomials of common degree m.
struct PolyNormPower {
    std::vector<ScalarPoly> polys;
    int m = 1;
    Rational p;
    Rational nu;
};

using ScalarFactor = std::variant<NormPower, CoordPower, PolyNormPower>;

Rational factor_degree(const ScalarFactor& f);
double eval_factor(const ScalarFactor& f, const Vec& x);
/// Text in the input grammar, e.g. "sgnpow(x_2, 1/3)".
std::string factor_str(const ScalarFactor& f);
bool factor_equal(const ScalarFactor& a, const ScalarFactor& b);
bool factor_less(const ScalarFactor& a, const ScalarFactor& b);

/// Product of scalar factors times a scalar polynomial.
struct ScalarTerm {
    std::vector<ScalarFactor> factors;
    ScalarPoly poly;
};

/// Product of scalar factors times a vector polynomial (one ScalarPoly per output).
struct HomogeneousTerm {
    std::vector<ScalarFactor> factors;
    std::vector<ScalarPoly> tail;

    int dim() const { return static_cast<int>(tail.size()); }
    Rational factor_degree_sum() const;
    /// Degree of the (homogeneous) tail; -1 if identically zero.
    int tail_degree() const;
    Rational degree() const;
    Vec eval(const Vec& x) const;
    std::string str() const;
};

/// Sum of product terms sharing one degree beta.
struct HomogeneousComponent {
    Rational degree;
    std::vector<HomogeneousTerm> terms;

    Vec eval(const Vec& x) const;
    std::string str() const;
};

/// numerator / (1 + denominator), expanded as numerator * sum_j (-denominator)^j.
struct Composite {
    std::vector<HomogeneousTerm> numerator;
    std::vector<ScalarTerm> denominator;
    Rational denominator_degree;
    int depth = 0;  // 0 means unbounded (rule-generated)
};

enum class SpecMode { Infinite, Finite, FiniteWithRemainder };

std::string mode_name(SpecMode mode);
SpecMode parse_mode(const std::string& name);

struct NonlinearitySpec {
    int dim = 1;
    SpecMode mode = SpecMode::Infinite;
    Rational remainder_exponent;  // epsilon-bar, FiniteWithRemainder only
    std::vector<HomogeneousTerm> terms;
    std::vector<Composite> composites;

    bool empty() const { return terms.empty() && composites.empty(); }
    /// Whether components come from an unbounded rule (a depth-free composite in h1 mode).
    bool is_rule_generated() const;

    /// Merged components of degree <= bound, ascending.
    std::vector<HomogeneousComponent> components_up_to(const Rational& bound) const;
    /// All components (finite modes, or when every composite has a depth).
    std::vector<HomogeneousComponent> components() const;
    /// First `count` components in degree order (materializing rule-generated ones).
    std::vector<HomogeneousComponent> first_components(int count) const;
    /// N*: number of components in finite modes.
    int component_count() const;

    /// sum_{k<=K} F_k(x).
    Vec evaluate(const Vec& x, int truncation) const;
    /// The F used for integration: closed-form composites in h1 mode, the full finite sum otherwise.
    Vec evaluate_full(const Vec& x) const;
    /// F(e^L z) / e^L, evaluated through homogeneity so tiny |y| never underflows.
    Vec evaluate_scaled(double log_scale, const Vec& z) const;

    /// Checks degrees (> 1, strictly increasing components) and homogeneity of every term.
    void validate() const;
};

/// Builds the composite expansion numerator * sum_{j<depth} (-denominator)^j, merged by degree.
std::vector<HomogeneousComponent> expand_composite(const Composite& c, int depth);

/// Merges terms into components by degree; identical factor lists add their tails.
std::vector<HomogeneousComponent> merge_by_degree(const std::vector<HomogeneousTerm>& terms);

/// Canonical form of a factor product: same-base factors merged, polynomial
/// powers moved into `poly_out`, factors sorted.
std::vector<ScalarFactor> canonicalize(std::vector<ScalarFactor> factors, ScalarPoly& poly_out);

struct FactorVerdict {
    std::string factor;
    bool smooth = true;
    std::string reason;
};

struct SmoothnessReport {
    bool applicable = true;
    std::vector<FactorVerdict> verdicts;
    /// Offending factors, in grammar text.
    std::vector<std::string> offending;
    std::string message;
};

/// Whether every factor is C-infinity near xi. Entries below zero_tol * |xi| count as zero.
SmoothnessReport smoothness_domain_check(const NonlinearitySpec& spec, const Vec& xi,
                                         double zero_tol = 1e-9);

struct Classification {
    bool lipschitz = false;
    std::string regularity;  // "locally-lipschitz" or "continuous-only"
    std::vector<std::string> notes;
};

Classification classify(const NonlinearitySpec& spec);

/// Whether P(x) = 0 only at x = 0, probed by projected gradient descent of |P|^2
/// on the unit sphere from seeded random starts.
bool poly_vanishes_only_at_origin(const std::vector<ScalarPoly>& polys, int starts = 200);

/// Precompiled F(e^L z)/e^L for the integrator.
class ScaledEvaluator {
public:
    explicit ScaledEvaluator(const NonlinearitySpec& spec);
    Vec operator()(double log_scale, const Vec& z) const;

private:
    struct Piece {
        double degree;
        HomogeneousTerm term;
    };
    struct ClosedComposite {
        std::vector<Piece> numerator;
        std::vector<ScalarTerm> denominator;
        double denominator_degree;
    };
    int dim_;
    std::vector<Piece> pieces_;
    std::vector<ClosedComposite> composites_;
};

double eval_scalar_term(const ScalarTerm& t, const Vec& x);

}  // namespace asympode
