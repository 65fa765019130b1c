#include "asympode/dynamics.hpp"

#include "asympode/error.hpp"
#include "asympode/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace asympode {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense output.
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

double dirichlet(const Mat& a, const Vec& w) {
    const double n2 = w.squaredNorm();
    return n2 > 0 ? (a * w).dot(w) / n2 : 0.0;
}

double median(std::vector<double> v) {
    if (v.empty()) return 0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::size_t window_begin(const Trajectory& traj, double fraction) {
    const double t_end = traj.samples.back().t;
    const double t0 = traj.samples.front().t;
    const double start = t_end - fraction * (t_end - t0);
    std::size_t k = 0;
    while (k < traj.samples.size() && traj.samples[k].t < start) ++k;
    return std::min(k, traj.samples.size() - 1);
}

}  // namespace

std::string termination_name(Termination t) {
    switch (t) {
        case Termination::Horizon: return "horizon";
        case Termination::MagnitudeFloor: return "magnitude_floor";
        case Termination::StepFailure: return "step_failure";
        case Termination::Divergence: return "divergence";
    }
    return "horizon";
}

Vec Trajectory::scaled(std::size_t k, double rate) const {
    const Sample& s = samples[k];
    const double n = s.y.stableNorm();
    if (n == 0) return Vec::Zero(s.y.size());
    return std::exp(rate * s.t + s.log_norm) * (s.y / n);
}

Trajectory integrate(const SpectralData& sd, const NonlinearitySpec& spec, const Vec& y0,
                     const IntegratorOptions& opt) {
    const int d = sd.dimension;
    if (y0.size() != d) throw Error(ErrorKind::InvalidInput, "initial condition has the wrong dimension");
    if (!y0.allFinite()) throw Error(ErrorKind::InvalidInput, "initial condition is not finite");
    if (!(opt.horizon > 0) || !(opt.sample_dt > 0))
        throw Error(ErrorKind::InvalidInput, "horizon and sample spacing must be positive");
    const double n0 = y0.norm();
    if (n0 == 0) throw Error(ErrorKind::InvalidInput, "initial condition is zero");

    const ScaledEvaluator g(spec);
    const Mat& a = sd.matrix;
    Trajectory traj;
    traj.tol = opt.tol;
    traj.y0_norm = n0;

    double L = std::log(n0);
    Vec z = y0 / n0;
    double t = 0;
    auto rhs = [&](double logscale, const Vec& w) {
        ++traj.rhs_evaluations;
        return Vec(-(a * w) + g(logscale, w));
    };

    auto record = [&](double ts, const Vec& w, double logscale) {
        Sample s;
        s.t = ts;
        const double wn = w.norm();
        s.log_norm = logscale + std::log(wn);
        s.y = std::exp(logscale) * w;
        s.dirichlet = dirichlet(a, w);
        traj.samples.push_back(std::move(s));
    };

    record(0.0, z, L);
    long next_sample = 1;
    const double log_floor = std::log(opt.magnitude_floor);
    const double log_diverge = std::log(1e100);

    Vec k1 = rhs(L, z), k2(d), k3(d), k4(d), k5(d), k6(d), k7(d), w1(d), tmp(d), err(d);
    double h = std::min({0.01 / std::max(1.0, k1.norm()), opt.sample_dt, opt.horizon});
    const double hmax = std::max(opt.horizon / 4, opt.sample_dt);

    long steps = 0;
    while (t < opt.horizon) {
        if (++steps > opt.max_steps) throw Error(ErrorKind::StepFailure, "step budget exhausted");
        h = std::min(h, opt.horizon - t);
        if (h < 1e-13 * std::max(1.0, t)) {
            if (traj.non_decay) {
                // Finite-time blow-up: the step collapses before the divergence threshold is reached.
                traj.reason = Termination::Divergence;
                break;
            }
            traj.reason = Termination::StepFailure;
            throw Error(ErrorKind::StepFailure,
                        "step size collapsed to " + std::to_string(h) + " at t = " + std::to_string(t));
        }

        tmp = z + h * a21 * k1;
        k2 = rhs(L, tmp);
        tmp = z + h * (a31 * k1 + a32 * k2);
        k3 = rhs(L, tmp);
        tmp = z + h * (a41 * k1 + a42 * k2 + a43 * k3);
        k4 = rhs(L, tmp);
        tmp = z + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        k5 = rhs(L, tmp);
        tmp = z + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        k6 = rhs(L, tmp);
        w1 = z + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        k7 = rhs(L, w1);
        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double e2 = 0;
        bool finite = w1.allFinite();
        for (int i = 0; i < d; ++i) {
            const double sc = opt.tol.abs + opt.tol.rel * std::max(std::fabs(z[i]), std::fabs(w1[i]));
            e2 += (err[i] / sc) * (err[i] / sc);
        }
        const double en = std::sqrt(e2 / d);
        if (!finite || !std::isfinite(en) || en > 1.0) {
            ++traj.rejected_steps;
            const double fac = std::isfinite(en) ? std::max(0.2, 0.9 * std::pow(en, -0.2)) : 0.2;
            h *= std::min(fac, 0.9);
            continue;
        }
        ++traj.accepted_steps;

        // Dense output on the sample grid inside (t, t + h].
        const double t_new = t + h;
        for (;;) {
            const double ts = static_cast<double>(next_sample) * opt.sample_dt;
            if (ts > t_new * (1 + 1e-15) || ts > opt.horizon * (1 + 1e-15)) break;
            const double theta = std::clamp((ts - t) / h, 0.0, 1.0);
            const Vec ydiff = w1 - z;
            const Vec bspl = h * k1 - ydiff;
            const Vec rc4 = ydiff - h * k7 - bspl;
            const Vec rc5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
            const double th1 = 1 - theta;
            const Vec w = z + theta * (ydiff + th1 * (bspl + theta * (rc4 + th1 * rc5)));
            record(ts, w, L);
            ++next_sample;
        }

        // Renormalise: y = e^L w1 = e^{L'} z' with |z'| = 1; the FSAL stage scales the same way.
        const double s = w1.norm();
        if (s == 0) {
            traj.reason = Termination::MagnitudeFloor;
            break;
        }
        L += std::log(s);
        z = w1 / s;
        k1 = k7 / s;
        t = t_new;

        if (L > std::log(10 * n0)) traj.non_decay = true;
        if (L < log_floor) {
            traj.reason = Termination::MagnitudeFloor;
            break;
        }
        if (L > log_diverge) {
            traj.reason = Termination::Divergence;
            break;
        }

        const double fac = en > 0 ? 0.9 * std::pow(en, -0.2) : 10.0;
        h = std::min(h * std::clamp(fac, 0.2, 10.0), hmax);
    }
    return traj;
}

std::vector<Trajectory> integrate_batch(const SpectralData& sd, const NonlinearitySpec& spec,
                                        const std::vector<Vec>& y0s, const IntegratorOptions& options) {
    return parallel_map(y0s.size(), [&](std::size_t i) { return integrate(sd, spec, y0s[i], options); });
}

std::vector<Trajectory> integrate_batch_serial(const SpectralData& sd, const NonlinearitySpec& spec,
                                               const std::vector<Vec>& y0s, const IntegratorOptions& options) {
    return serial_map(y0s.size(), [&](std::size_t i) { return integrate(sd, spec, y0s[i], options); });
}

std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2) return {0.0, n ? y[0] : 0.0};
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double b = sxx > 0 ? sxy / sxx : 0.0;
    return {b, my - b * mx};
}

FirstApproximation first_approximation(const SpectralData& sd, const Trajectory& traj, double window_fraction) {
    if (traj.samples.size() < 10) throw Error(ErrorKind::InsufficientDecay, "trajectory has too few samples");
    if (!(window_fraction > 0 && window_fraction < 1))
        throw Error(ErrorKind::InvalidInput, "window fraction must lie in (0, 1)");
    const double decades =
        (traj.samples.front().log_norm - traj.samples.back().log_norm) / std::log(10.0);
    if (decades < 6)
        throw Error(ErrorKind::InsufficientDecay,
                    "trajectory decayed only " + std::to_string(decades) + " orders of magnitude (need 6)");

    const std::size_t k0 = window_begin(traj, window_fraction);
    FirstApproximation fa;
    fa.window_start = traj.samples[k0].t;
    fa.window_end = traj.samples.back().t;
    for (std::size_t k = k0; k < traj.samples.size(); ++k) fa.tail_dirichlet.push_back(traj.samples[k].dirichlet);
    fa.dirichlet_median = median(fa.tail_dirichlet);
    const auto [mn, mx] = std::minmax_element(fa.tail_dirichlet.begin(), fa.tail_dirichlet.end());
    fa.dirichlet_spread = *mx - *mn;

    int best = 0;
    for (int j = 1; j < sd.distinct_count(); ++j)
        if (std::fabs(sd.distinct_float[static_cast<std::size_t>(j)] - fa.dirichlet_median) <
            std::fabs(sd.distinct_float[static_cast<std::size_t>(best)] - fa.dirichlet_median))
            best = j;
    if (sd.distinct_count() > 1) {
        double gap = HUGE_VAL;
        for (int j = 1; j < sd.distinct_count(); ++j)
            gap = std::min(gap, sd.distinct_float[static_cast<std::size_t>(j)] -
                                    sd.distinct_float[static_cast<std::size_t>(j) - 1]);
        const double dist = std::fabs(sd.distinct_float[static_cast<std::size_t>(best)] - fa.dirichlet_median);
        if (dist > 0.25 * gap)
            throw Error(ErrorKind::AmbiguousRate, "Dirichlet quotient median " + std::to_string(fa.dirichlet_median) +
                                                      " is not within a quarter gap of any eigenvalue");
    }
    fa.n0 = best;
    fa.lambda_star = sd.distinct[static_cast<std::size_t>(best)];
    fa.lambda_star_float = fa.lambda_star.to_double();

    const int d = sd.dimension;
    Vec mean = Vec::Zero(d);
    std::size_t count = 0;
    for (std::size_t k = k0; k < traj.samples.size(); ++k) {
        mean += traj.scaled(k, fa.lambda_star_float);
        ++count;
    }
    mean /= static_cast<double>(count);
    const double mn_norm = mean.norm();
    if (!(mn_norm > 1e-10 * traj.y0_norm))
        throw Error(ErrorKind::ZeroLimit, "e^{lambda* t} y(t) tends to zero; the decay is faster (extend the horizon)");
    fa.eigen_residual = (sd.matrix * mean - fa.lambda_star_float * mean).norm() / mn_norm;
    fa.xi = project(sd, best, mean);

    std::vector<double> ts, ls;
    for (std::size_t k = k0; k < traj.samples.size(); ++k) {
        const double r = (traj.scaled(k, fa.lambda_star_float) - fa.xi).norm();
        if (r > 0) {
            ts.push_back(traj.samples[k].t);
            ls.push_back(std::log(r));
        }
    }
    fa.convergence_slope = fit_line(ts, ls).first;
    return fa;
}

DecayBoundsReport decay_bounds_check(const SpectralData& sd, const Trajectory& traj, double window_fraction) {
    DecayBoundsReport rep;
    if (traj.samples.size() < 2) return rep;
    const double l1 = sd.distinct_float.front();
    const double ld = sd.distinct_float.back();
    rep.delta = 0.05 * ld;
    rep.lower = -(ld + rep.delta);
    rep.upper = -(l1 - rep.delta);
    const std::size_t k0 = window_begin(traj, window_fraction);
    std::vector<double> ts, ls;
    for (std::size_t k = k0; k < traj.samples.size(); ++k) {
        ts.push_back(traj.samples[k].t);
        ls.push_back(traj.samples[k].log_norm);
    }
    std::tie(rep.slope, rep.intercept) = fit_line(ts, ls);
    double lc1 = HUGE_VAL, lc2 = -HUGE_VAL;
    for (const auto& s : traj.samples) {
        lc1 = std::min(lc1, s.log_norm + (ld + rep.delta) * s.t);
        lc2 = std::max(lc2, s.log_norm + (l1 - rep.delta) * s.t);
    }
    rep.c1 = std::exp(lc1);
    rep.c2 = std::exp(lc2);
    rep.pass = rep.slope >= rep.lower && rep.slope <= rep.upper;
    return rep;
}

}  // namespace asympode
