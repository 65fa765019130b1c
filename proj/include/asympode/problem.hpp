#pragma once

#include "asympode/dynamics.hpp"
#include "asympode/error.hpp"
#include "asympode/expansion.hpp"
#include "asympode/report.hpp"
#include "asympode/serialize.hpp"
#include "asympode/spectral.hpp"
#include "asympode/termlang.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace asympode {

/// A run configuration read from a JSON problem file.
struct ProblemFile {
    /// Entries as written (decimal or rational strings) and their values.
    std::vector<std::vector<std::string>> matrix_text;
    Mat matrix;
    /// Grammar text; a structured {"components": [...]} entry is joined into a vector literal.
    std::string nonlinearity;
    std::map<std::string, Rational> params;
    SpecMode mode = SpecMode::Infinite;
    Rational remainder_exponent;
    Vec y0;
    double horizon = 40.0;
    double sample_dt = 0.05;
    int n_terms = 3;
    Tolerances tol;
    double snap_tol = 1e-9;
    double window_fraction = 0.2;
    ResonancePolicy policy = ResonancePolicy::Fit;
    std::string output_dir = "run";
    std::optional<Rational> lambda_star;
    /// Reject odd and non-integer norm indices at parse time.
    bool strict_smoothness = false;
};

/// Validates every field; all problems found are reported together (InvalidInput).
ProblemFile parse_problem(const Json& j);
ProblemFile load_problem(const std::string& path);
/// All fields with defaults filled in.
Json resolved_config(const ProblemFile& pf);

/// Maps an error to the exit-code contract: 3 for inapplicability, 1 otherwise.
int exit_code_for(ErrorKind kind);
Json error_record(const Error& e);

/// Shared state of one run directory. Later stages reuse artifacts written by
/// earlier ones; a directory written under a different configuration is cleared first.
class Run {
public:
    Run(ProblemFile pf, std::string dir);

    const ProblemFile& problem() const { return pf_; }
    const std::string& dir() const { return dir_; }
    std::string path(const std::string& name) const;
    bool has(const std::string& name) const;

    /// Removes every artifact this tool writes.
    void clear();

    const SpectralData& spectral();
    const NonlinearitySpec& spec();
    /// Reads trajectory.csv or integrates and writes it.
    const Trajectory& trajectory();
    /// Reads first-approx.json or computes it (also writes decay.json).
    const FirstApproximation& first_approx();
    /// lambda* from the problem file, a single-eigenvalue A, or the first approximation.
    Rational lambda_star();
    ExponentLattice lattice(int count);
    /// Classification and smoothness gate at xi*; writes regularity.json. Throws InapplicableAtXi.
    Classification check_regularity();
    /// Writes series.json and lattice.json.
    const ExpansionSeries& expand();
    /// Reads series.json; throws MissingArtifact.
    ExpansionSeries load_series() const;
    /// Writes report.json and residuals.csv (plus residuals.dat for gnuplot).
    VerificationReport verify(const ExpansionSeries& series, EmitFormat extra = EmitFormat::Json);

private:
    void sync_config();

    ProblemFile pf_;
    std::string dir_;
    std::optional<SpectralData> sd_;
    std::optional<NonlinearitySpec> spec_;
    std::optional<Trajectory> traj_;
    std::optional<FirstApproximation> fa_;
    std::optional<ExpansionSeries> series_;
};

struct PipelineResult {
    int exit_code = 0;
    std::string message;
    std::optional<ExpansionSeries> series;
    std::optional<VerificationReport> report;
};

/// decompose -> integrate -> first approximation -> regularity gate -> lattice ->
/// expand -> verify -> emit, over a freshly cleared run directory.
/// Errors are caught, written to error.json and mapped to exit codes.
PipelineResult run_pipeline(const ProblemFile& pf, const std::string& dir,
                            EmitFormat extra = EmitFormat::Json);

}  // namespace asympode
