// Serial reference vs OpenMP for the three parallel kernels:
// batch integration, J_n assembly and residual verification.

#include "asympode/expansion.hpp"
#include "asympode/parser.hpp"
#include "asympode/report.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace asympode;

namespace {

const char* const kNonlinearity =
    "[norm2(x)^{2/3}*abs(x_1)^{1/2}*x_2^3, norm_{5/2}(x)^{1/3}*x_1*sgnpow(x_2,1/4)]";

struct Problem {
    SpectralData sd;
    NonlinearitySpec spec;
    Vec xi;

    Problem() : sd(decompose((Mat(2, 2) << 2, 1, 1, 2).finished())), spec(parse(kNonlinearity)), xi(2) {
        xi << 0.3, -0.3;
    }

    static NonlinearitySpec parse(const char* text) {
        ParseOptions opt;
        opt.dim = 2;
        return parse_nonlinearity(text, opt);
    }
};

const Problem& problem() {
    static const Problem p;
    return p;
}

std::vector<Vec> initial_conditions(int n) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd(0, 1);
    std::vector<Vec> out;
    for (int i = 0; i < n; ++i) {
        Vec v(2);
        v << nd(rng), nd(rng);
        out.push_back(0.3 * v / v.norm());
    }
    return out;
}

void BM_IntegrateBatch(benchmark::State& state) {
    const auto& p = problem();
    const auto y0s = initial_conditions(static_cast<int>(state.range(0)));
    IntegratorOptions opt;
    opt.horizon = 30;
    const bool parallel = state.range(1) != 0;
    for (auto _ : state) {
        auto out = parallel ? integrate_batch(p.sd, p.spec, y0s, opt) : integrate_batch_serial(p.sd, p.spec, y0s, opt);
        benchmark::DoNotOptimize(out);
    }
    state.SetLabel(parallel ? "openmp" : "serial");
}

void BM_BuildJn(benchmark::State& state) {
    const auto& p = problem();
    const int n = static_cast<int>(state.range(0));
    ExpansionEngine engine(p.sd, p.spec, Rational(1), p.xi, n + 1);
    ExpandOptions opt;
    opt.n_terms = n - 1;
    const auto series = expand(p.sd, p.spec, Rational(1), p.xi, opt);
    std::vector<VectorPolynomial> qs;
    for (const auto& t : series.terms) qs.push_back(t.q);
    const bool parallel = state.range(1) != 0;
    for (auto _ : state) {
        auto j = engine.build_jn(n, qs, parallel);
        benchmark::DoNotOptimize(j);
    }
    state.SetLabel(parallel ? "openmp" : "serial");
}

void BM_Verify(benchmark::State& state) {
    const auto& p = problem();
    IntegratorOptions io;
    io.horizon = 40;
    const auto traj = integrate(p.sd, p.spec, p.xi, io);
    const auto fa = first_approximation(p.sd, traj);
    ExpandOptions opt;
    opt.n_terms = static_cast<int>(state.range(0)) + 1;
    opt.policy = ResonancePolicy::Fit;
    opt.trajectory = &traj;
    const auto series = expand(p.sd, p.spec, fa.lambda_star, fa.xi, opt);
    VerifyOptions vo;
    vo.parallel = state.range(1) != 0;
    for (auto _ : state) {
        auto rep = verify(traj, series, static_cast<int>(state.range(0)), vo);
        benchmark::DoNotOptimize(rep);
    }
    state.SetLabel(vo.parallel ? "openmp" : "serial");
}

}  // namespace

BENCHMARK(BM_IntegrateBatch)->ArgsProduct({{4, 16}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BuildJn)->ArgsProduct({{8, 12}, {0, 1}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Verify)->ArgsProduct({{4, 8}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
