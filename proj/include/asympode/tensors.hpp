#pragma once

#include "asympode/jet.hpp"
#include "asympode/polynomial.hpp"
#include "asympode/termlang.hpp"

#include <vector>

namespace asympode {

/// D^m F_r(xi) / m! as a symmetric m-linear map R^d x ... x R^d -> R^d.
/// Entries are stored once per sorted index tuple i_1 <= ... <= i_m (0-based);
/// entry(tuple) is the value of the map on (e_{i_1}, ..., e_{i_m}).
struct DerivativeTensor {
    int order = 0;
    int dim = 0;
    Vec base;
    std::vector<std::vector<int>> indices;
    std::vector<Vec> entries;
    /// Frobenius norm of the full (unsymmetrized-storage) tensor; bounds the operator norm.
    double norm_bound = 0.0;

    /// Entry for an arbitrary (unsorted) index tuple.
    Vec entry(std::vector<int> tuple) const;
    /// Contraction with m constant vectors.
    Vec apply(const std::vector<Vec>& args) const;
};

constexpr int kDefaultTensorOrderCap = 12;

/// Tensors of orders 0..max_order of one homogeneous component at xi.
/// Throws SingularBasePoint (a factor is not smooth at xi) or OrderOverflow.
std::vector<DerivativeTensor> taylor_tensors(const HomogeneousComponent& component, const Vec& xi, int max_order,
                                             int cap = kDefaultTensorOrderCap);

/// Multilinear contraction with vector polynomials in t; degree of the result
/// is the sum of argument degrees. Throws ArityMismatch.
VectorPolynomial apply_to_polynomials(const DerivativeTensor& t, const std::vector<VectorPolynomial>& args);

}  // namespace asympode
