#include "asympode/exponents.hpp"

#include "asympode/error.hpp"

#include <map>
#include <queue>
#include <set>

namespace asympode {

namespace {

constexpr std::size_t kMaxDecompositions = 20000;

using MinHeap = std::priority_queue<Rational, std::vector<Rational>, std::greater<Rational>>;

}  // namespace

std::string Generator::label() const {
    if (kind == EigenGap) return "lambda_" + std::to_string(index + 1) + " - lambda*";
    return "alpha_" + std::to_string(index + 1) + " lambda*";
}

int ExponentLattice::index_of_tilde(const Rational& tilde) const {
    std::size_t lo = 0, hi = elements.size();
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (elements[mid].tilde < tilde) lo = mid + 1;
        else hi = mid;
    }
    if (lo < elements.size() && elements[lo].tilde == tilde) return static_cast<int>(lo);
    return -1;
}

DegreeSource finite_degrees(std::vector<Rational> alphas) {
    return [alphas = std::move(alphas)](int j) -> std::optional<Rational> {
        if (j < 0 || j >= static_cast<int>(alphas.size())) return std::nullopt;
        return alphas[static_cast<std::size_t>(j)];
    };
}

ExponentLattice build_lattice(const SpectralData& sd, const Rational& lambda_star, const DegreeSource& alphas,
                              int count, bool rule_generated) {
    if (count < 1) throw Error(ErrorKind::InvalidInput, "lattice size must be at least 1");
    const int n0 = sd.index_of(lambda_star);
    if (n0 < 0) throw Error(ErrorKind::NotAnEigenvalue, lambda_star.str() + " is not an eigenvalue of A");

    ExponentLattice lat;
    lat.lambda_star = lambda_star;
    lat.n0 = n0;
    for (int k = n0 + 1; k < sd.distinct_count(); ++k) {
        Generator g;
        g.kind = Generator::EigenGap;
        g.index = k;
        g.source = sd.distinct[static_cast<std::size_t>(k)];
        g.value = g.source - lambda_star;
        lat.generators.push_back(g);
    }

    int next_degree = 0;
    std::optional<Rational> pending = alphas ? alphas(0) : std::nullopt;
    if (rule_generated && !pending) throw Error(ErrorKind::EmptyDegreeList, "degree rule produced no degrees");
    std::optional<Rational> previous;

    MinHeap heap;
    std::set<Rational> seen;
    std::vector<Rational> popped;
    heap.push(Rational(0));
    seen.insert(Rational(0));

    auto push = [&](const Rational& v) {
        if (seen.insert(v).second) heap.push(v);
    };

    while (static_cast<int>(popped.size()) < count) {
        // Materialize degree generators that could produce something below the frontier.
        while (pending) {
            const Rational gval = *pending * lambda_star;
            if (!heap.empty() && gval > heap.top()) break;
            if (pending->sign() <= 0 || (previous && *pending <= *previous))
                throw Error(ErrorKind::InvalidInput, "degree exponents alpha must be positive and strictly increasing");
            Generator g;
            g.kind = Generator::Degree;
            g.index = next_degree;
            g.source = *pending;
            g.value = gval;
            lat.generators.push_back(g);
            for (const auto& e : popped) push(e + gval);
            previous = pending;
            pending = alphas(++next_degree);
        }
        if (heap.empty()) {
            lat.finite = true;
            break;
        }
        const Rational v = heap.top();
        heap.pop();
        popped.push_back(v);
        for (const auto& g : lat.generators)
            if (g.value.sign() > 0) push(v + g.value);
    }

    // Decompositions by dynamic programming over the sorted elements.
    const std::size_t ng = lat.generators.size();
    std::map<Rational, std::set<std::vector<int>>> decomps;
    std::map<Rational, bool> truncated;
    for (const auto& v : popped) {
        auto& mine = decomps[v];
        if (v.is_zero()) {
            mine.insert(std::vector<int>(ng, 0));
            continue;
        }
        for (std::size_t g = 0; g < ng; ++g) {
            const Rational rest = v - lat.generators[g].value;
            if (rest.sign() < 0) continue;
            auto it = decomps.find(rest);
            if (it == decomps.end()) continue;
            for (auto combo : it->second) {
                if (mine.size() >= kMaxDecompositions) {
                    truncated[v] = true;
                    break;
                }
                ++combo[g];
                mine.insert(std::move(combo));
            }
            if (truncated[rest]) truncated[v] = true;
        }
    }
    for (const auto& v : popped) {
        LatticeElement e;
        e.tilde = v;
        e.mu = v + lambda_star;
        const auto& ds = decomps[v];
        e.decompositions.assign(ds.begin(), ds.end());
        e.decompositions_truncated = truncated[v];
        lat.elements.push_back(std::move(e));
    }
    return lat;
}

ExponentLattice build_lattice(const SpectralData& sd, const Rational& lambda_star,
                              const std::vector<Rational>& alphas, int count) {
    return build_lattice(sd, lambda_star, finite_degrees(alphas), count, false);
}

std::vector<Rational> candidate_rates(const SpectralData& sd, const Rational& alpha1, int count) {
    if (alpha1.sign() <= 0) throw Error(ErrorKind::InvalidInput, "alpha1 must be positive");
    std::vector<Rational> gens(sd.distinct.begin(), sd.distinct.end());
    gens.push_back(alpha1 * sd.distinct.front());
    MinHeap heap;
    std::set<Rational> seen;
    for (const auto& l : sd.distinct)
        if (seen.insert(l).second) heap.push(l);
    std::vector<Rational> out;
    while (static_cast<int>(out.size()) < count && !heap.empty()) {
        const Rational v = heap.top();
        heap.pop();
        out.push_back(v);
        for (const auto& g : gens)
            if (seen.insert(v + g).second) heap.push(v + g);
    }
    return out;
}

}  // namespace asympode
