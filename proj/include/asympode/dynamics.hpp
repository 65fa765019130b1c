#pragma once

#include "asympode/linalg.hpp"
#include "asympode/rational.hpp"
#include "asympode/spectral.hpp"
#include "asympode/termlang.hpp"

#include <string>
#include <vector>

namespace asympode {

struct Tolerances {
    double abs = 1e-12;
    double rel = 1e-12;
};

struct IntegratorOptions {
    double horizon = 100.0;
    double sample_dt = 0.05;
    Tolerances tol;
    /// Stop once |y| falls below this.
    double magnitude_floor = 1e-280;
    long max_steps = 20000000;
};

struct Sample {
    double t = 0;
    Vec y;
    double log_norm = 0;   // log |y|
    double dirichlet = 0;  // (Ay . y) / |y|^2
};

enum class Termination { Horizon, MagnitudeFloor, StepFailure, Divergence };

std::string termination_name(Termination t);

struct Trajectory {
    std::vector<Sample> samples;
    std::string method = "dopri5";
    Tolerances tol;
    long accepted_steps = 0;
    long rejected_steps = 0;
    long rhs_evaluations = 0;
    Termination reason = Termination::Horizon;
    /// |y| exceeded 10 |y0| at some point.
    bool non_decay = false;
    double y0_norm = 0;

    /// e^{rate t} y(t) at sample k, computed through log |y| so it never overflows.
    Vec scaled(std::size_t k, double rate) const;
};

/// Adaptive Dormand-Prince 5(4) on y' = -Ay + F(y) in the representation
/// y = e^L z, |z| = 1, renormalised after every accepted step; errors are
/// controlled relative to |y|. Dense output on the sample grid.
/// Throws StepFailure when the step size collapses.
Trajectory integrate(const SpectralData& sd, const NonlinearitySpec& spec, const Vec& y0,
                     const IntegratorOptions& options);

/// Independent trajectories, one per initial condition (OpenMP across conditions).
std::vector<Trajectory> integrate_batch(const SpectralData& sd, const NonlinearitySpec& spec,
                                        const std::vector<Vec>& y0s, const IntegratorOptions& options);
/// Serial reference for integrate_batch.
std::vector<Trajectory> integrate_batch_serial(const SpectralData& sd, const NonlinearitySpec& spec,
                                               const std::vector<Vec>& y0s, const IntegratorOptions& options);

struct FirstApproximation {
    Rational lambda_star;
    double lambda_star_float = 0;
    int n0 = 0;
    Vec xi;
    double eigen_residual = 0;
    double dirichlet_median = 0;
    double dirichlet_spread = 0;
    double window_start = 0;
    double window_end = 0;
    std::vector<double> tail_dirichlet;
    /// Fitted decay rate of |e^{lambda* t} y(t) - xi| on the window (negative when converging).
    double convergence_slope = 0;
};

/// Dirichlet-quotient rate detection and the limit xi* = lim e^{lambda* t} y(t).
/// Throws InsufficientDecay, AmbiguousRate, ZeroLimit.
FirstApproximation first_approximation(const SpectralData& sd, const Trajectory& traj, double window_fraction = 0.2);

struct DecayBoundsReport {
    double slope = 0;
    double intercept = 0;
    double lower = 0;  // -(Lambda_d + delta)
    double upper = 0;  // -(Lambda_1 - delta)
    double delta = 0;
    double c1 = 0;  // min |y| e^{(Lambda_d + delta) t}
    double c2 = 0;  // max |y| e^{(Lambda_1 - delta) t}
    bool pass = false;
};

DecayBoundsReport decay_bounds_check(const SpectralData& sd, const Trajectory& traj, double window_fraction = 0.2);

/// Ordinary least squares y = a + b x; returns {b, a}.
std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace asympode
