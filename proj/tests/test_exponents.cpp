#include "asympode/exponents.hpp"

#include "oracles.hpp"
#include "support.hpp"

using namespace asympode;
using namespace testing_support;

namespace {

DegreeSource geometric_degrees() {
    return [](int k) -> std::optional<Rational> { return Rational(1, 3) + Rational(k, 4); };
}

std::vector<Rational> tildes(const ExponentLattice& l) {
    std::vector<Rational> out;
    for (const auto& e : l.elements) out.push_back(e.tilde);
    return out;
}

void check_invariants(const ExponentLattice& l, const SpectralData& sd) {
    REQUIRE(l.size() >= 1);
    CHECK(l.elements[0].tilde == Rational(0));
    CHECK(l.elements[0].mu == l.lambda_star);
    for (int n = 0; n + 1 < l.size(); ++n) CHECK(l.elements[static_cast<std::size_t>(n)].tilde < l.elements[static_cast<std::size_t>(n + 1)].tilde);
    const Rational top = l.window_max();
    for (const auto& a : l.elements)
        for (const auto& b : l.elements)
            if (a.tilde + b.tilde <= top) CHECK(l.index_of_tilde(a.tilde + b.tilde) >= 0);
    for (const auto& e : l.elements) {
        CHECK(e.mu == e.tilde + l.lambda_star);
        if (e.tilde.is_zero()) continue;
        CHECK(!e.decompositions.empty());
        for (const auto& dcmp : e.decompositions) {
            Rational s(0);
            for (std::size_t g = 0; g < dcmp.size(); ++g) s = s + l.generators[g].value * Rational(dcmp[g]);
            CHECK(s == e.tilde);
        }
    }
    for (const auto& lam : sd.distinct)
        if (lam >= l.lambda_star && lam - l.lambda_star <= top) CHECK(l.index_of_tilde(lam - l.lambda_star) >= 0);
}

}  // namespace

TEST_CASE("cubic scalar lattice") {
    const auto sd = decompose(mat({{1}}));
    const auto l = build_lattice(sd, Rational(1), std::vector<Rational>{Rational(2)}, 6);
    std::vector<Rational> mus;
    for (const auto& e : l.elements) mus.push_back(e.mu);
    CHECK(mus == std::vector<Rational>{1, 3, 5, 7, 9, 11});
    check_invariants(l, sd);
}

TEST_CASE("geometric degree rule matches brute force") {
    const auto sd = decompose(mat({{1}}));
    const auto l = build_lattice(sd, Rational(1), geometric_degrees(), 25, true);
    REQUIRE(l.size() == 25);
    const std::vector<Rational> head{Rational(0), Rational(1, 3), Rational(7, 12), Rational(2, 3),
                                     Rational(5, 6), Rational(11, 12), Rational(1)};
    for (std::size_t i = 0; i < head.size(); ++i) CHECK(l.elements[i].tilde == head[i]);
    std::vector<Rational> gens;
    for (int k = 0; Rational(1, 3) + Rational(k, 4) <= l.window_max(); ++k) gens.push_back(Rational(1, 3) + Rational(k, 4));
    auto brute = oracles::brute_force_semigroup(gens, l.window_max());
    CHECK(tildes(l) == brute);
    check_invariants(l, sd);
    // Gap bound: consecutive elements differ by at most alpha_1 lambda*.
    for (int n = 0; n + 1 < l.size(); ++n)
        CHECK(l.elements[static_cast<std::size_t>(n)].tilde + Rational(1, 3) >= l.elements[static_cast<std::size_t>(n + 1)].tilde);
}

TEST_CASE("two eigenvalues: lambda_2 - lambda* has two decompositions") {
    const auto sd = decompose(mat({{1, 0}, {0, 3}}));
    const auto l = build_lattice(sd, Rational(1), std::vector<Rational>{Rational(2)}, 5);
    const int i = l.index_of_tilde(Rational(2));
    REQUIRE(i >= 0);
    CHECK(l.elements[static_cast<std::size_t>(i)].decompositions.size() == 2);
    check_invariants(l, sd);
}

TEST_CASE("random generators agree with brute force") {
    std::mt19937_64 rng(21);
    std::uniform_int_distribution<int> num(1, 9), den(2, 6);
    for (int trial = 0; trial < 30; ++trial) {
        const int d = 1 + trial % 3;
        Vec lam(d);
        for (int i = 0; i < d; ++i) lam[i] = 1 + i + 0.5 * (trial % 2);
        const auto sd = decompose(Mat(lam.asDiagonal()));
        const Rational ls = sd.distinct[static_cast<std::size_t>(trial % d)];
        std::vector<Rational> alphas;
        Rational a(num(rng), den(rng));
        for (int k = 0; k < 3; ++k) {
            alphas.push_back(a);
            a = a + Rational(num(rng), den(rng));
        }
        const auto l = build_lattice(sd, ls, alphas, 25);
        std::vector<Rational> gens;
        for (const auto& lj : sd.distinct)
            if (lj > ls) gens.push_back(lj - ls);
        for (const auto& al : alphas) gens.push_back(al * ls);
        auto brute = oracles::brute_force_semigroup(gens, l.window_max());
        CHECK(tildes(l) == brute);
        check_invariants(l, sd);
    }
}

TEST_CASE("linear problems give gap-only lattices") {
    const auto sd = decompose(mat({{1, 0}, {0, 3}}));
    const auto l = build_lattice(sd, Rational(1), std::vector<Rational>{}, 4);
    std::vector<Rational> mus;
    for (const auto& e : l.elements) mus.push_back(e.mu);
    CHECK(mus == std::vector<Rational>{1, 3, 5, 7});
    const auto top = build_lattice(sd, Rational(3), std::vector<Rational>{}, 4);
    CHECK(top.finite);
    CHECK(top.size() == 1);
}

TEST_CASE("lattice errors") {
    const auto sd = decompose(mat({{1, 0}, {0, 3}}));
    CHECK(kind_of([&] { build_lattice(sd, Rational(2), std::vector<Rational>{Rational(1)}, 4); }) ==
          ErrorKind::NotAnEigenvalue);
    DegreeSource none = [](int) -> std::optional<Rational> { return std::nullopt; };
    CHECK(kind_of([&] { build_lattice(sd, Rational(1), none, 4, true); }) == ErrorKind::EmptyDegreeList);
    CHECK(kind_of([&] { build_lattice(sd, Rational(1), std::vector<Rational>{Rational(1), Rational(1, 2)}, 4); }) ==
          ErrorKind::InvalidInput);
}

TEST_CASE("candidate rates") {
    const auto one = decompose(mat({{1}}));
    CHECK(candidate_rates(one, Rational(2), 4) == std::vector<Rational>{1, 2, 3, 4});
    const auto two = decompose(mat({{1, 0}, {0, 3}}));
    CHECK(candidate_rates(two, Rational(1, 3), 5) ==
          std::vector<Rational>{Rational(1), Rational(4, 3), Rational(5, 3), Rational(2), Rational(7, 3)});
    const auto r = candidate_rates(two, Rational(5, 7), 10);
    CHECK(r.front() == Rational(1));
    for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i - 1] < r[i]);
}
