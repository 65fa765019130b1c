#pragma once

#include "asympode/rational.hpp"
#include "asympode/termlang.hpp"

#include <map>
#include <memory>
#include <vector>

namespace asympode {

/// Monomials of total degree <= order in d variables, graded order (degree
/// first, then lexicographic). The index of a monomial does not depend on the
/// truncation order, so low coefficients are computed identically at any order.
class JetSpace {
public:
    JetSpace(int dim, int order);

    int dim() const { return dim_; }
    int order() const { return order_; }
    int size() const { return static_cast<int>(monomials_.size()); }
    const Monomial& monomial(int k) const { return monomials_[static_cast<std::size_t>(k)]; }
    int degree_of(int k) const { return degrees_[static_cast<std::size_t>(k)]; }
    int index(const Monomial& m) const;
    /// [begin, end) range of indices of degree exactly k.
    std::pair<int, int> degree_range(int k) const;

    /// (i, j) pairs whose product lands on index k, in fixed order.
    const std::vector<std::pair<int, int>>& products_into(int k) const {
        return products_[static_cast<std::size_t>(k)];
    }

private:
    int dim_;
    int order_;
    std::vector<Monomial> monomials_;
    std::vector<int> degrees_;
    std::vector<int> degree_start_;
    std::map<Monomial, int> lookup_;
    std::vector<std::vector<std::pair<int, int>>> products_;
};

/// Truncated Taylor polynomial in the displacement h about a base point.
struct Jet {
    std::shared_ptr<const JetSpace> space;
    std::vector<double> c;

    double value() const { return c[0]; }
};

Jet jet_constant(const std::shared_ptr<const JetSpace>& space, double v);
/// x_i = base_i + h_i.
Jet jet_variable(const std::shared_ptr<const JetSpace>& space, int i, double base);
Jet operator+(const Jet& a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator*(const Jet& a, double s);
/// u^a for u(0) > 0, via u0^a sum_k binom(a, k) (w/u0)^k with w = u - u0.
Jet jet_pow(const Jet& u, const Rational& a);
/// |u|^a and |u|^a sign(u) for u(0) != 0.
Jet jet_abs_pow(const Jet& u, const Rational& a);
Jet jet_signed_pow(const Jet& u, const Rational& a);
Jet jet_int_pow(const Jet& u, int n);

/// Generalized binomial coefficient binom(a, k), computed exactly.
double binomial(const Rational& a, int k);
/// m! / prod(alpha_i!), exactly.
double multinomial(const Monomial& alpha);

/// Jets of the components of a homogeneous component (one per output) at xi.
/// Throws SingularBasePoint when a factor is not smooth at xi.
std::vector<Jet> component_jets(const HomogeneousComponent& comp, const Vec& xi,
                                const std::shared_ptr<const JetSpace>& space);

}  // namespace asympode
