#pragma once

#include "asympode/dynamics.hpp"
#include "asympode/expansion.hpp"

#include <optional>
#include <string>
#include <vector>

namespace asympode {

struct VerifyOptions {
    /// Upper edge of the fit window: |u_N| <= upper_fraction * |y0|.
    double upper_fraction = 1e-4;
    /// Lower edge: |u_N| >= noise_factor * max(rel tol, 1e-15) * |y(t)|.
    double noise_factor = 1e3;
    /// Fewer admissible samples than this gives a vacuous pass.
    int min_samples = 20;
    /// Residual streams in parallel; false runs the serial reference.
    bool parallel = true;
};

/// Fitted decay of one residual stream u_N.
struct ResidualFit {
    int n = 0;
    Rational mu_n;
    /// mu_{N+1} when the lattice window reaches it.
    std::optional<Rational> mu_next;
    /// q_{N+1} is known and identically zero / known and nonzero / unknown.
    enum NextTerm { Zero, NonZero, Unknown } next = Unknown;
    double slope = 0;
    double intercept = 0;
    int samples = 0;
    double window_start = 0;
    double window_end = 0;
    double margin = 0;
    double tolerance = 0;
    /// Residual hit float noise before a usable window formed.
    bool vacuous = false;
    /// Mean |u_{N+1}| <= mean |u_N| on the final quarter of this window (unset for the last N).
    std::optional<bool> improves;
    bool pass = false;
    std::string note;
};

struct VerificationReport {
    ResonancePolicy policy = ResonancePolicy::Zero;
    Tolerances tol;
    Rational lattice_window;
    std::vector<ResidualFit> fits;
    /// t and log|u_N(t)| (per N, per sample; -inf where u_N vanishes).
    std::vector<double> t;
    std::vector<std::vector<double>> log_residuals;
    std::vector<std::string> warnings;
    bool pass = true;
};

/// log|u_N(t_k)| for every sample, u_N = y - sum_{n <= N} q_n e^{-mu_n t},
/// evaluated in the scaled frame e^{mu_1 t} so that it never underflows.
std::vector<double> log_residual_stream(const Trajectory& traj, const ExpansionSeries& series, int n);

/// Residual streams u_1..u_{N_max} with fitted slopes and verdicts. Streams are
/// independent and computed in parallel.
VerificationReport verify(const Trajectory& traj, const ExpansionSeries& series, int n_max,
                          const VerifyOptions& options = {});

enum class EmitFormat { Json, Csv, Gnuplot };
EmitFormat parse_format(const std::string& name);

/// Writes report.json, residuals.csv or residuals.dat under `dir`; returns the path. Throws IoFailure.
std::string emit(const VerificationReport& report, EmitFormat format, const std::string& dir);
/// series.json (json only).
std::string emit(const ExpansionSeries& series, EmitFormat format, const std::string& dir);
/// lattice.json, or lattice.txt with the exponents table for csv / gnuplot.
std::string emit(const ExponentLattice& lattice, EmitFormat format, const std::string& dir);

/// The table printed by the `exponents` subcommand.
std::string lattice_table(const ExponentLattice& lattice);

}  // namespace asympode
