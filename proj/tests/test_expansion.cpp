#include "asympode/dynamics.hpp"
#include "asympode/expansion.hpp"

#include "support.hpp"

using namespace asympode;
using namespace testing_support;

namespace {

// q' + (A - mu) q - p, coefficient-wise.
double ode_residual(const SpectralData& sd, const Rational& mu, const VectorPolynomial& q, const VectorPolynomial& p) {
    const Mat shifted = sd.matrix - mu.to_double() * Mat::Identity(sd.dimension, sd.dimension);
    const VectorPolynomial r = q.derivative() + q.left(shifted) - p;
    return r.max_abs_coeff();
}

// Degree ignoring round-off sized trailing coefficients.
int effective_degree(const VectorPolynomial& q, double tol) {
    int d = q.degree();
    while (d >= 0 && q.coeff(d).cwiseAbs().maxCoeff() <= tol) --d;
    return d;
}

VectorPolynomial poly(std::initializer_list<std::initializer_list<double>> cols, int d) {
    Mat c(d, static_cast<Eigen::Index>(cols.size()));
    Eigen::Index k = 0;
    for (const auto& col : cols) {
        Eigen::Index i = 0;
        for (double v : col) c(i++, k) = v;
        ++k;
    }
    return VectorPolynomial(c);
}

ExpansionSeries cubic_series(double xi, int n, bool parallel = true) {
    static const auto sd = decompose(mat({{1}}));
    static const auto spec = spec_of("-x^3", 1);
    ExpandOptions opt;
    opt.n_terms = n;
    opt.parallel = parallel;
    return expand(sd, spec, Rational(1), vec({xi}), opt);
}

}  // namespace

TEST_CASE("polynomial ODE: worked cases") {
    const auto sd = decompose(mat({{1, 0}, {0, 3}}));
    const auto q = solve_polynomial_ode(sd, Rational(2), poly({{1, 0}, {0, 1}}, 2));
    CHECK(q == poly({{-1, -1}, {0, 1}}, 2));
    CHECK(ode_residual(sd, Rational(2), q, poly({{1, 0}, {0, 1}}, 2)) == 0.0);

    const double c = 0.75;
    const auto qr = solve_polynomial_ode(sd, Rational(3), poly({{0, 1}}, 2), {Vec(), vec({0, c})});
    CHECK(qr == poly({{0, c}, {0, 1}}, 2));

    const Vec xi = vec({0.4, 0});
    const auto q1 = solve_polynomial_ode(sd, Rational(1), VectorPolynomial(2), {xi});
    CHECK(q1 == VectorPolynomial::constant(xi));
}

TEST_CASE("polynomial ODE: random instances, including non-diagonal A") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> ev(1, 4), deg(0, 5);
    for (int trial = 0; trial < 300; ++trial) {
        const int d = 1 + trial % 3;
        Vec lam(d);
        for (int i = 0; i < d; ++i) lam[i] = ev(rng);
        Mat a = Mat(lam.asDiagonal());
        if (trial % 2) {
            const Mat s = Mat::Identity(d, d) + 0.2 * Mat::Random(d, d);
            a = s * a * s.inverse();
        }
        const auto sd = decompose(a);
        const Rational mu(ev(rng));
        Mat coeffs = Mat::Random(d, deg(rng) + 1);
        const VectorPolynomial p(coeffs);
        std::vector<Vec> consts(static_cast<std::size_t>(sd.distinct_count()));
        for (auto& c : consts) c = random_vec(rng, d);
        const auto q = solve_polynomial_ode(sd, mu, p, consts);
        CHECK(ode_residual(sd, mu, q, p) <= 1e-12 * std::max(1.0, p.max_abs_coeff()) * 10);
        const bool resonant = sd.index_of(mu) >= 0;
        for (int j = 0; j < sd.distinct_count(); ++j) {
            const auto& r = sd.projections[static_cast<std::size_t>(j)];
            const auto pj = p.left(r), qj = q.left(r);
            const int dp = effective_degree(pj, 1e-12);
            if (dp < 0) continue;
            if (sd.distinct[static_cast<std::size_t>(j)] == mu)
                CHECK(effective_degree(qj, 1e-12) == dp + 1);
            else
                CHECK(effective_degree(qj, 1e-12) == dp);
        }
        if (!resonant) CHECK(effective_degree(q, 1e-12) == effective_degree(p, 1e-12));
    }
}

TEST_CASE("cubic series matches the binomial expansion of the exact solution") {
    const double xi = 0.5 / std::sqrt(1.25);
    const auto s = cubic_series(xi, 4);
    REQUIRE(s.size() == 4);
    const double expect[] = {xi, std::pow(xi, 3) / 2, 3 * std::pow(xi, 5) / 8, 5 * std::pow(xi, 7) / 16};
    const Rational mus[] = {1, 3, 5, 7};
    for (int n = 0; n < 4; ++n) {
        const auto& t = s.terms[static_cast<std::size_t>(n)];
        CHECK(t.mu == mus[n]);
        CHECK(t.q.degree() == 0);
        CHECK(t.q.coeff(0)[0] == doctest::Approx(expect[n]).epsilon(1e-14));
    }
    CHECK(s.terms[1].j.coeff(0)[0] == doctest::Approx(-std::pow(xi, 3)).epsilon(1e-14));
    CHECK(s.terms[0].j.is_zero());
}

TEST_CASE("every term satisfies its ODE") {
    struct P {
        const char* a;
        const char* f;
        int d;
        Mat m;
        Vec xi;
        Rational ls;
    };
    const std::vector<P> problems = {
        {"diag13", "[-abs(x_1)^{1/2}*x_2 + x_1^2, -x_1^2*x_2]", 2, mat({{1, 0}, {0, 3}}), vec({0.8, 0}), Rational(1)},
        {"triangular", "[-abs(x_2)*x_1, -x_1^2*x_2]", 2, mat({{1, 0}, {1, 2}}), vec({0, 0.6}), Rational(2)},
        {"sym", "norm2(x)^{1/3}*x", 2, mat({{2, 1}, {1, 2}}), vec({-0.3, 0.3}), Rational(1)},
        {"geometric", "comp(abs(x)^{1/3}*x; abs(x)^{1/4})", 1, mat({{1}}), vec({0.2}), Rational(1)},
    };
    for (const auto& p : problems) {
        CAPTURE(std::string(p.a));
        const auto sd = decompose(p.m);
        const auto spec = spec_of(p.f, p.d);
        ExpandOptions opt;
        opt.n_terms = 10;
        const auto s = expand(sd, spec, p.ls, p.xi, opt);
        REQUIRE(s.size() == 10);
        for (const auto& t : s.terms) {
            CAPTURE(t.n);
            const double scale = std::max(1.0, t.j.max_abs_coeff());
            CHECK(ode_residual(sd, t.mu, t.q, t.j) <= 1e-12 * scale);
        }
    }
}

TEST_CASE("multiset enumeration equals ordered tuples") {
    const auto sd = decompose(mat({{1, 0}, {0, 3}}));
    const auto spec = spec_of("[-abs(x_2)^{1/2}*x_1 + x_1^2 + norm2(x)^{2}*x_1, x_1^3 - x_1^2*x_2]", 2);
    ExpansionEngine engine(sd, spec, Rational(1), vec({0.7, 0.1}), 9);
    std::vector<VectorPolynomial> qs;
    std::mt19937_64 rng(5);
    for (int n = 1; n <= 8; ++n) {
        Mat c = Mat::Random(2, 1 + n % 3);
        qs.push_back(VectorPolynomial(c));
    }
    for (int n = 1; n <= 8; ++n) {
        const auto a = engine.build_jn(n, qs);
        const auto b = engine.build_jn_ordered(n, qs);
        CHECK((a - b).max_abs_coeff() <= 1e-12 * std::max(1.0, b.max_abs_coeff()));
    }
}

TEST_CASE("J_n bookkeeping") {
    const auto sd = decompose(mat({{1}}));
    const auto spec = spec_of("-x^3", 1);
    ExpansionEngine engine(sd, spec, Rational(1), vec({0.5}), 6);
    CHECK(engine.jn_contributions(1).empty());
    const auto j2 = engine.jn_contributions(2);
    REQUIRE(j2.size() == 1);
    CHECK(j2[0].ks.empty());
    // mu~_4 = 6 = 2 + 2 + 2: (k) = (2, 2) with weight 1, and (3) with weight 1, under the cubic.
    const auto j4 = engine.jn_contributions(4);
    CHECK(j4.size() == 2);
    CHECK(kind_of([&] { engine.build_jn(3, {VectorPolynomial::constant(vec({0.5}))}); }) == ErrorKind::MissingPredecessor);
}

TEST_CASE("truncation consistency and parallel determinism") {
    const double xi = 0.3;
    const auto s8 = cubic_series(xi, 8), s12 = cubic_series(xi, 12), serial = cubic_series(xi, 12, false);
    for (int n = 0; n < 8; ++n) CHECK(s8.terms[static_cast<std::size_t>(n)].q == s12.terms[static_cast<std::size_t>(n)].q);
    for (int n = 0; n < 12; ++n) CHECK(serial.terms[static_cast<std::size_t>(n)].q == s12.terms[static_cast<std::size_t>(n)].q);

    const auto sd = decompose(mat({{2, 1}, {1, 2}}));
    const auto spec = spec_of("[norm2(x)^{2/3}*abs(x_1)^{1/2}*x_2^3, norm_{5/2}(x)^{1/3}*x_1*sgnpow(x_2,1/4)]", 2);
    ExpandOptions o8, o12;
    o8.n_terms = 8;
    o12.n_terms = 12;
    const auto a = expand(sd, spec, Rational(1), vec({0.3, -0.3}), o8);
    const auto b = expand(sd, spec, Rational(1), vec({0.3, -0.3}), o12);
    for (int n = 0; n < 8; ++n) CHECK(a.terms[static_cast<std::size_t>(n)].q == b.terms[static_cast<std::size_t>(n)].q);
}

TEST_CASE("evaluate_series") {
    const double xi = 0.4;
    const auto s = cubic_series(xi, 3);
    CHECK(evaluate_series(s, 2.0, 0)[0] == 0.0);
    CHECK(evaluate_series(s, 2.0, 1)[0] == doctest::Approx(xi * std::exp(-2.0)).epsilon(1e-15));
    CHECK(evaluate_series(s, 5.0, 2)[0] ==
          doctest::Approx(xi * std::exp(-5.0) + std::pow(xi, 3) / 2 * std::exp(-15.0)).epsilon(1e-15));
}

TEST_CASE("finite mode with remainder bounds N") {
    const auto sd = decompose(mat({{1}}));
    const auto spec = spec_of("-x^3 + x^5", 1, {}, SpecMode::FiniteWithRemainder, Rational(1, 2));
    ExpandOptions opt;
    opt.n_terms = 3;
    const auto s = expand(sd, spec, Rational(1), vec({0.3}), opt);
    REQUIRE(s.n_bar.has_value());
    CHECK(*s.n_bar == 3);
    opt.n_terms = 4;
    CHECK(kind_of([&] { expand(sd, spec, Rational(1), vec({0.3}), opt); }) == ErrorKind::FiniteModeExceeded);
}

TEST_CASE("smoothness gate blocks the Bruno system") {
    const auto sd = decompose(mat({{1, 0}, {0, 3}}));
    const auto spec = spec_of("[0, 3/2*x_1^2*sgnpow(x_2, 1/3)]", 2);
    ExpandOptions opt;
    try {
        expand(sd, spec, Rational(1), vec({1, 0}), opt);
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InapplicableAtXi);
        CHECK(std::string(e.what()).find("sgnpow(x_2, 1/3)") != std::string::npos);
    }
}

TEST_CASE("fit policy recovers the resonant constant of a linear flow") {
    const auto sd = decompose(mat({{1, 0}, {0, 3}}));
    const auto spec = spec_of("[0, 0]", 2);
    IntegratorOptions io;
    io.horizon = 30;
    const auto traj = integrate(sd, spec, vec({0.5, 0.25}), io);
    const auto fa = first_approximation(sd, traj);
    ExpandOptions opt;
    opt.n_terms = 2;
    opt.policy = ResonancePolicy::Fit;
    opt.trajectory = &traj;
    const auto s = expand(sd, spec, fa.lambda_star, fa.xi, opt);
    REQUIRE(s.size() == 2);
    CHECK(s.terms[1].mu == Rational(3));
    CHECK(s.terms[1].q.coeff(0)[1] == doctest::Approx(0.25).epsilon(1e-9));
    opt.policy = ResonancePolicy::Zero;
    CHECK(expand(sd, spec, fa.lambda_star, fa.xi, opt).terms[1].q.is_zero());
    opt.policy = ResonancePolicy::Fit;
    opt.trajectory = nullptr;
    CHECK(kind_of([&] { expand(sd, spec, fa.lambda_star, fa.xi, opt); }) == ErrorKind::InvalidInput);
}
