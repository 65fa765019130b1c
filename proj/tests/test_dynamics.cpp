#include "asympode/dynamics.hpp"

#include "support.hpp"

using namespace asympode;
using namespace testing_support;

namespace {

double bernoulli(double y0, double t) {
    const double c = (1 + y0 * y0) / (y0 * y0);
    return std::exp(-t) / std::sqrt(c - std::exp(-2 * t));
}

Trajectory run(const char* a_text, const Mat& a, const char* f, const Vec& y0, double horizon, double tol = 1e-12) {
    (void)a_text;
    IntegratorOptions opt;
    opt.horizon = horizon;
    opt.tol = {tol, tol};
    return integrate(decompose(a), spec_of(f, static_cast<int>(a.rows())), y0, opt);
}

Trajectory synthetic(const Mat& a, const std::function<Vec(double)>& y, double horizon) {
    Trajectory tr;
    for (double t = 0; t <= horizon + 1e-9; t += 0.05) {
        Sample s;
        s.t = t;
        s.y = y(t);
        s.log_norm = std::log(s.y.norm());
        s.dirichlet = (a * s.y).dot(s.y) / s.y.squaredNorm();
        tr.samples.push_back(s);
    }
    tr.y0_norm = tr.samples.front().y.norm();
    return tr;
}

}  // namespace

TEST_CASE("linear flow is exact") {
    const auto tr = run("", mat({{1, 0}, {0, 2}}), "[0, 0]", vec({1, 1}), 5);
    const auto& s = tr.samples[20];
    REQUIRE(s.t == doctest::Approx(1.0));
    CHECK((s.y - vec({std::exp(-1.0), std::exp(-2.0)})).norm() < 1e-10);
    for (std::size_t k = 1; k < tr.samples.size(); ++k) CHECK(tr.samples[k].t > tr.samples[k - 1].t);
}

TEST_CASE("cubic matches the Bernoulli solution") {
    const auto tr = run("", mat({{1}}), "-x^3", vec({0.5}), 10);
    double worst = 0;
    for (const auto& s : tr.samples) worst = std::max(worst, std::fabs(s.y[0] - bernoulli(0.5, s.t)));
    CHECK(worst < 1e-9);
    CHECK(tr.reason == Termination::Horizon);
}

TEST_CASE("geometric composite in one dimension: e^t y(t) converges") {
    const auto a = run("", mat({{1}}), "comp(abs(x)^{1/3}*x; abs(x)^{1/4})", vec({0.1}), 40, 1e-12);
    const auto b = run("", mat({{1}}), "comp(abs(x)^{1/3}*x; abs(x)^{1/4})", vec({0.1}), 40, 5e-13);
    double prev = HUGE_VAL;
    for (std::size_t k = 0; k < a.samples.size(); ++k) {
        const double w = a.scaled(k, 1.0)[0];
        CHECK(std::isfinite(w));
        CHECK(w < 1.0);
        if (a.samples[k].t > 20) {
            CHECK(std::fabs(w - prev) < 1e-3);
            const double wb = b.scaled(k, 1.0)[0];
            CHECK(std::fabs(w - wb) < 1e-9 * std::fabs(w));
        }
        prev = w;
    }
}

TEST_CASE("first approximation: eigenvector initial condition") {
    const Mat a = mat({{2, 1}, {1, 2}});
    const Vec y0 = vec({0.3, 0.3});
    const auto tr = run("", a, "[0, 0]", y0, 20);
    const auto fa = first_approximation(decompose(a), tr);
    CHECK(fa.lambda_star == Rational(3));
    CHECK((fa.xi - y0).norm() < 1e-10);
}

TEST_CASE("first approximation: cubic limit") {
    const auto tr = run("", mat({{1}}), "-x^3", vec({0.5}), 40);
    const auto fa = first_approximation(decompose(mat({{1}})), tr);
    CHECK(fa.lambda_star == Rational(1));
    CHECK(std::fabs(fa.xi[0] - 0.5 / std::sqrt(1.25)) < 1e-7);
    CHECK(fa.eigen_residual <= 1e-6);
    CHECK(fa.convergence_slope < 0);
}

TEST_CASE("first approximation: triangular example, generic data") {
    const Mat a = mat({{1, 0}, {1, 2}});
    const auto sd = decompose(a);
    std::mt19937_64 rng(8);
    for (int k = 0; k < 5; ++k) {
        const Vec y0 = random_vec(rng, 2, 0.2);
        const auto tr = run("", a, "[-abs(x_2)*x_1, -x_1^2*x_2]", y0, 40);
        const auto fa = first_approximation(sd, tr);
        CHECK((fa.lambda_star == Rational(1) || fa.lambda_star == Rational(2)));
        CHECK((a * fa.xi - fa.lambda_star.to_double() * fa.xi).norm() <= 1e-6 * fa.xi.norm());
        CHECK(fa.xi.norm() > 0);
    }
}

TEST_CASE("tolerance robustness and quotient settling") {
    const Mat a = mat({{2, 1}, {1, 2}});
    const char* f = "[norm2(x)^{2/3}*abs(x_1)^{1/2}*x_2^3, norm_{5/2}(x)^{1/3}*x_1*sgnpow(x_2,1/4)]";
    const auto t1 = run("", a, f, vec({0.3, -0.1}), 40, 1e-12);
    const auto t2 = run("", a, f, vec({0.3, -0.1}), 40, 5e-13);
    const auto sd = decompose(a);
    const auto f1 = first_approximation(sd, t1), f2 = first_approximation(sd, t2);
    CHECK(f1.lambda_star == f2.lambda_star);
    CHECK((f1.xi - f2.xi).norm() <= 1e-7 * f2.xi.norm());
    double lo = HUGE_VAL, hi = -HUGE_VAL;
    for (const auto& s : t1.samples) {
        CHECK(s.y.norm() > 0.0);
        if (s.log_norm <= std::log(1e-6)) {
            lo = std::min(lo, s.dirichlet);
            hi = std::max(hi, s.dirichlet);
        }
    }
    CHECK(hi - lo <= 1e-6);
}

TEST_CASE("decay bounds") {
    const Mat a = mat({{1, 0}, {0, 2}});
    const auto sd = decompose(a);
    const auto generic = decay_bounds_check(sd, run("", a, "[0, 0]", vec({1, 1}), 40));
    CHECK(generic.slope == doctest::Approx(-1).epsilon(1e-6));
    CHECK(generic.pass);
    CHECK(generic.delta == doctest::Approx(0.1));
    const auto fast = decay_bounds_check(sd, run("", a, "[0, 0]", vec({0, 1}), 40));
    CHECK(fast.slope == doctest::Approx(-2).epsilon(1e-6));
    CHECK(fast.pass);
    const auto cubic = decay_bounds_check(decompose(mat({{1}})), run("", mat({{1}}), "-x^3", vec({0.5}), 40));
    CHECK(cubic.slope >= -1.05);
    CHECK(cubic.slope <= -0.95);
    CHECK(cubic.c1 > 0);
    CHECK(cubic.c2 >= cubic.c1);
}

TEST_CASE("long decay reaches the magnitude floor without underflow") {
    const auto tr = run("", mat({{1, 0}, {0, 2}}), "[0, 0]", vec({1, 1}), 1000);
    CHECK(tr.reason == Termination::MagnitudeFloor);
    CHECK(tr.samples.back().log_norm < std::log(1e-270));
    const std::size_t k = tr.samples.size() - 1;
    CHECK(tr.scaled(k, 1.0)[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("blow-up is reported, not hidden") {
    const auto tr = run("", mat({{1}}), "x^3", vec({2.0}), 10);
    CHECK(tr.non_decay);
    CHECK(tr.reason == Termination::Divergence);
}

TEST_CASE("first-approximation failure modes") {
    const Mat a = mat({{1, 0}, {0, 2}});
    const auto sd = decompose(a);
    const auto short_run = run("", a, "[0, 0]", vec({1, 1}), 3);
    CHECK(kind_of([&] { first_approximation(sd, short_run); }) == ErrorKind::InsufficientDecay);
    // Quotient stuck halfway between the eigenvalues.
    const auto mid = synthetic(
        a, [](double t) { return vec({std::exp(-1.5 * t), std::exp(-1.5 * t)}); }, 20);
    CHECK(kind_of([&] { first_approximation(sd, mid); }) == ErrorKind::AmbiguousRate);
    // Decays at rate 1 along the first axis but with a vanishing limit.
    const auto zero = synthetic(
        a, [](double t) { return vec({std::exp(-t - t * t / 10), 0}); }, 40);
    CHECK(kind_of([&] { first_approximation(sd, zero); }) == ErrorKind::ZeroLimit);
}

TEST_CASE("batch integration: parallel equals serial") {
    const Mat a = mat({{1, 0}, {1, 2}});
    const auto sd = decompose(a);
    const auto spec = spec_of("[-abs(x_2)*x_1, -x_1^2*x_2]", 2);
    std::mt19937_64 rng(4);
    std::vector<Vec> y0s;
    for (int k = 0; k < 6; ++k) y0s.push_back(random_vec(rng, 2, 0.2));
    IntegratorOptions opt;
    opt.horizon = 20;
    const auto p = integrate_batch(sd, spec, y0s, opt);
    const auto s = integrate_batch_serial(sd, spec, y0s, opt);
    REQUIRE(p.size() == s.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        REQUIRE(p[i].samples.size() == s[i].samples.size());
        for (std::size_t k = 0; k < p[i].samples.size(); ++k) CHECK(p[i].samples[k].y == s[i].samples[k].y);
    }
}

TEST_CASE("line fit") {
    std::vector<double> x, y;
    for (int i = 0; i < 30; ++i) {
        x.push_back(0.1 * i);
        y.push_back(2.0 - 3.5 * 0.1 * i);
    }
    const auto [b, a] = fit_line(x, y);
    CHECK(b == doctest::Approx(-3.5).epsilon(1e-12));
    CHECK(a == doctest::Approx(2.0).epsilon(1e-12));
}
