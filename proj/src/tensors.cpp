#include "asympode/tensors.hpp"

#include "asympode/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>

namespace asympode {

namespace {

Monomial tuple_to_alpha(const std::vector<int>& tuple, int dim) {
    Monomial a(static_cast<std::size_t>(dim), 0);
    for (int i : tuple) ++a[static_cast<std::size_t>(i)];
    return a;
}


// Sorted tuples of length m over {0..dim-1}, lexicographic.
std::vector<std::vector<int>> sorted_tuples(int dim, int m) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(static_cast<std::size_t>(m), 0);
    if (m == 0) return {{}};
    for (;;) {
        out.push_back(cur);
        int pos = m - 1;
        while (pos >= 0 && cur[static_cast<std::size_t>(pos)] == dim - 1) --pos;
        if (pos < 0) break;
        const int v = cur[static_cast<std::size_t>(pos)] + 1;
        for (int k = pos; k < m; ++k) cur[static_cast<std::size_t>(k)] = v;
    }
    return out;
}

}  // namespace

Vec DerivativeTensor::entry(std::vector<int> tuple) const {
    std::sort(tuple.begin(), tuple.end());
    auto it = std::lower_bound(indices.begin(), indices.end(), tuple);
    if (it == indices.end() || *it != tuple) throw Error(ErrorKind::IndexOutOfRange, "tensor index out of range");
    return entries[static_cast<std::size_t>(it - indices.begin())];
}

Vec DerivativeTensor::apply(const std::vector<Vec>& args) const {
    std::vector<VectorPolynomial> polys;
    for (const auto& a : args) polys.push_back(VectorPolynomial::constant(a));
    VectorPolynomial r = apply_to_polynomials(*this, polys);
    return r.is_zero() ? Vec::Zero(dim) : Vec(r.coeff(0));
}

std::vector<DerivativeTensor> taylor_tensors(const HomogeneousComponent& component, const Vec& xi, int max_order,
                                             int cap) {
    if (max_order < 0) throw Error(ErrorKind::InvalidInput, "tensor order must be nonnegative");
    if (max_order > cap)
        throw Error(ErrorKind::OrderOverflow,
                    "tensor order " + std::to_string(max_order) + " exceeds the cap " + std::to_string(cap));
    const int d = static_cast<int>(xi.size());
    auto space = std::make_shared<const JetSpace>(d, max_order);
    const auto jets = component_jets(component, xi, space);

    std::vector<DerivativeTensor> out;
    for (int m = 0; m <= max_order; ++m) {
        DerivativeTensor t;
        t.order = m;
        t.dim = d;
        t.base = xi;
        t.indices = sorted_tuples(d, m);
        double frob = 0;
        for (const auto& tuple : t.indices) {
            const Monomial alpha = tuple_to_alpha(tuple, d);
            const int k = space->index(alpha);
            const double mult = multinomial(alpha);
            Vec e(d);
            for (int i = 0; i < d; ++i) e[i] = jets[static_cast<std::size_t>(i)].c[static_cast<std::size_t>(k)] / mult;
            frob += mult * e.squaredNorm();
            t.entries.push_back(std::move(e));
        }
        t.norm_bound = std::sqrt(frob);
        out.push_back(std::move(t));
    }
    return out;
}

VectorPolynomial apply_to_polynomials(const DerivativeTensor& t, const std::vector<VectorPolynomial>& args) {
    if (static_cast<int>(args.size()) != t.order)
        throw Error(ErrorKind::ArityMismatch, "tensor of order " + std::to_string(t.order) + " applied to " +
                                                  std::to_string(args.size()) + " arguments");
    const int d = t.dim;
    for (const auto& a : args)
        if (!a.is_zero() && a.dim() != d) throw Error(ErrorKind::ArityMismatch, "argument dimension mismatch");

    // Entries keyed by exponent vector; contract the last argument repeatedly.
    std::map<Monomial, VectorPolynomial> cur;
    for (std::size_t k = 0; k < t.indices.size(); ++k)
        cur.emplace(tuple_to_alpha(t.indices[k], d), VectorPolynomial::constant(t.entries[k]));
    for (int m = t.order; m >= 1; --m) {
        const VectorPolynomial& y = args[static_cast<std::size_t>(m - 1)];
        std::map<Monomial, VectorPolynomial> next;
        for (const auto& tuple : sorted_tuples(d, m - 1)) {
            Monomial beta = tuple_to_alpha(tuple, d);
            VectorPolynomial acc(d);
            if (!y.is_zero()) {
                for (int j = 0; j < d; ++j) {
                    const auto row = y.row(j);
                    if ((row.array() == 0.0).all()) continue;
                    ++beta[static_cast<std::size_t>(j)];
                    acc += cur.at(beta).times(row);
                    --beta[static_cast<std::size_t>(j)];
                }
            }
            next.emplace(std::move(beta), std::move(acc));
        }
        cur = std::move(next);
    }
    return cur.begin()->second;
}

}  // namespace asympode
