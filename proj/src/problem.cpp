#include "asympode/problem.hpp"

#include "asympode/error.hpp"
#include "asympode/parser.hpp"

#include <cmath>
#include <filesystem>
#include <set>

namespace asympode {

namespace {

namespace fs = std::filesystem;

const char* const kArtifacts[] = {"resolved-config.json", "spectral.json", "trajectory.csv", "first-approx.json",
                                  "decay.json",           "regularity.json", "lattice.json", "lattice.txt",
                                  "series.json",          "series.csv",    "series.dat",     "report.json",
                                  "residuals.csv",        "residuals.dat", "error.json"};

std::string entry_text(const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number()) return v.dump();
    throw Error(ErrorKind::InvalidInput, "expected a number or a rational string, got " + v.dump());
}

/// Collects every validation problem before failing.
struct Issues {
    std::vector<std::string> list;

    template <class Fn>
    void check(const std::string& field, Fn&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            list.push_back(field + ": " + e.what());
        } catch (const nlohmann::json::exception& e) {
            list.push_back(field + ": " + e.what());
        }
    }
    void require(bool ok, const std::string& message) {
        if (!ok) list.push_back(message);
    }
};

double bounded(const Json& v, const std::string& field, double lo, double hi, bool open_lo) {
    if (!v.is_number()) throw Error(ErrorKind::InvalidInput, "expected a number, got " + v.dump());
    const double x = v.get<double>();
    const bool ok = std::isfinite(x) && (open_lo ? x > lo : x >= lo) && x <= hi;
    if (!ok)
        throw Error(ErrorKind::InvalidInput, field + " = " + v.dump() + " outside " + (open_lo ? "(" : "[") +
                                                 format_double(lo) + ", " + format_double(hi) + "]");
    return x;
}

}  // namespace

ProblemFile parse_problem(const Json& j) {
    if (!j.is_object()) throw Error(ErrorKind::InvalidInput, "problem file must be a JSON object");
    static const std::set<std::string> known = {
        "matrix",     "nonlinearity", "params",      "mode",      "remainder_exponent", "initial_condition",
        "horizon",    "sample_dt",    "n_terms",     "tolerances", "resonance",         "output_dir",
        "lambda_star", "strict_smoothness"};
    ProblemFile pf;
    Issues issues;
    for (const auto& [key, value] : j.items()) issues.require(known.count(key) > 0, "unknown field '" + key + "'");
    for (const char* key : {"matrix", "nonlinearity", "initial_condition"})
        issues.require(j.contains(key), std::string("missing required field '") + key + "'");

    int dim = 0;
    if (j.contains("matrix"))
        issues.check("matrix", [&] {
            const Json& m = j.at("matrix");
            if (!m.is_array() || m.empty()) throw Error(ErrorKind::InvalidInput, "must be a non-empty array of rows");
            dim = static_cast<int>(m.size());
            pf.matrix = Mat(dim, dim);
            for (int r = 0; r < dim; ++r) {
                const Json& row = m[static_cast<std::size_t>(r)];
                if (!row.is_array() || static_cast<int>(row.size()) != dim)
                    throw Error(ErrorKind::InvalidInput, "row " + std::to_string(r + 1) + " must have " +
                                                             std::to_string(dim) + " entries (matrix must be square)");
                std::vector<std::string> texts;
                for (int c = 0; c < dim; ++c) {
                    texts.push_back(entry_text(row[static_cast<std::size_t>(c)]));
                    pf.matrix(r, c) = Rational::parse(texts.back()).to_double();
                }
                pf.matrix_text.push_back(std::move(texts));
            }
        });
    if (j.contains("params"))
        issues.check("params", [&] {
            const Json& p = j.at("params");
            if (!p.is_object()) throw Error(ErrorKind::InvalidInput, "must be an object of name -> rational");
            for (const auto& [name, value] : p.items()) pf.params[name] = parse_constant(entry_text(value), pf.params);
        });
    if (j.contains("nonlinearity"))
        issues.check("nonlinearity", [&] {
            const Json& n = j.at("nonlinearity");
            if (n.is_string()) {
                pf.nonlinearity = n.get<std::string>();
            } else if (n.is_object() && n.contains("components") && n.at("components").is_array()) {
                const Json& comps = n.at("components");
                if (comps.size() == 1) {
                    pf.nonlinearity = comps[0].get<std::string>();
                } else {
                    pf.nonlinearity = "[";
                    for (std::size_t i = 0; i < comps.size(); ++i)
                        pf.nonlinearity += (i ? ", " : "") + comps[i].get<std::string>();
                    pf.nonlinearity += "]";
                }
            } else {
                throw Error(ErrorKind::InvalidInput, "must be grammar text or {\"components\": [...]}");
            }
        });
    if (j.contains("mode")) issues.check("mode", [&] { pf.mode = parse_mode(j.at("mode").get<std::string>()); });
    if (j.contains("remainder_exponent"))
        issues.check("remainder_exponent", [&] {
            pf.remainder_exponent = parse_constant(entry_text(j.at("remainder_exponent")), pf.params);
            if (pf.remainder_exponent.sign() <= 0) throw Error(ErrorKind::InvalidInput, "must be positive");
        });
    issues.require(pf.mode != SpecMode::FiniteWithRemainder || pf.remainder_exponent.sign() > 0,
                   "mode finite_with_remainder needs a positive remainder_exponent");
    if (j.contains("initial_condition"))
        issues.check("initial_condition", [&] {
            const Json& y = j.at("initial_condition");
            pf.y0 = y.is_number() ? Vec::Constant(1, y.get<double>()) : vec_from_json(y);
            if (!pf.y0.allFinite()) throw Error(ErrorKind::InvalidInput, "entries must be finite");
            if (dim > 0 && pf.y0.size() != dim)
                throw Error(ErrorKind::InvalidInput, "has " + std::to_string(pf.y0.size()) + " entries, matrix is " +
                                                         std::to_string(dim) + "x" + std::to_string(dim));
            if (pf.y0.norm() == 0) throw Error(ErrorKind::InvalidInput, "must be nonzero");
        });
    if (j.contains("horizon"))
        issues.check("horizon", [&] { pf.horizon = bounded(j.at("horizon"), "horizon", 0, 1e6, true); });
    if (j.contains("sample_dt"))
        issues.check("sample_dt", [&] { pf.sample_dt = bounded(j.at("sample_dt"), "sample_dt", 0, 1e3, true); });
    issues.require(pf.sample_dt <= pf.horizon, "sample_dt must not exceed horizon");
    if (j.contains("n_terms"))
        issues.check("n_terms", [&] {
            const Json& v = j.at("n_terms");
            if (!v.is_number_integer() || v.get<int>() < 1 || v.get<int>() > 200)
                throw Error(ErrorKind::InvalidInput, "must be an integer in [1, 200]");
            pf.n_terms = v.get<int>();
        });
    if (j.contains("tolerances"))
        issues.check("tolerances", [&] {
            const Json& t = j.at("tolerances");
            if (!t.is_object()) throw Error(ErrorKind::InvalidInput, "must be an object");
            for (const auto& [key, value] : t.items()) {
                if (key == "abs") pf.tol.abs = bounded(value, "abs", 0, 1e-2, true);
                else if (key == "rel") pf.tol.rel = bounded(value, "rel", 0, 1e-2, true);
                else if (key == "snap") pf.snap_tol = bounded(value, "snap", 0, 1e-2, true);
                else if (key == "window_fraction") pf.window_fraction = bounded(value, "window_fraction", 0, 0.9, true);
                else throw Error(ErrorKind::InvalidInput, "unknown tolerance '" + key + "'");
            }
        });
    if (j.contains("resonance"))
        issues.check("resonance", [&] { pf.policy = parse_policy(j.at("resonance").get<std::string>()); });
    if (j.contains("output_dir"))
        issues.check("output_dir", [&] { pf.output_dir = j.at("output_dir").get<std::string>(); });
    if (j.contains("lambda_star"))
        issues.check("lambda_star",
                     [&] { pf.lambda_star = parse_constant(entry_text(j.at("lambda_star")), pf.params); });
    if (j.contains("strict_smoothness"))
        issues.check("strict_smoothness", [&] { pf.strict_smoothness = j.at("strict_smoothness").get<bool>(); });

    if (!issues.list.empty()) {
        std::string msg = "invalid problem file:";
        for (const auto& s : issues.list) msg += "\n  " + s;
        throw Error(ErrorKind::InvalidInput, msg);
    }
    return pf;
}

ProblemFile load_problem(const std::string& path) { return parse_problem(read_json(path)); }

Json resolved_config(const ProblemFile& pf) {
    Json params = Json::object();
    for (const auto& [k, v] : pf.params) params[k] = v.str();
    return {{"schema_version", kSchemaVersion},
            {"matrix", pf.matrix_text},
            {"nonlinearity", pf.nonlinearity},
            {"params", params},
            {"mode", mode_name(pf.mode)},
            {"remainder_exponent", pf.remainder_exponent.str()},
            {"initial_condition", to_json(pf.y0)},
            {"horizon", pf.horizon},
            {"sample_dt", pf.sample_dt},
            {"n_terms", pf.n_terms},
            {"tolerances",
             {{"abs", pf.tol.abs}, {"rel", pf.tol.rel}, {"snap", pf.snap_tol}, {"window_fraction", pf.window_fraction}}},
            {"resonance", policy_name(pf.policy)},
            {"output_dir", pf.output_dir},
            {"lambda_star", pf.lambda_star ? Json(pf.lambda_star->str()) : Json(nullptr)},
            {"strict_smoothness", pf.strict_smoothness}};
}

int exit_code_for(ErrorKind kind) { return kind == ErrorKind::InapplicableAtXi ? 3 : 1; }

Json error_record(const Error& e) {
    return {{"schema_version", kSchemaVersion},
            {"kind", std::string(to_string(e.kind()))},
            {"message", e.what()},
            {"exit_code", exit_code_for(e.kind())}};
}

// ---------------------------------------------------------------------- run

Run::Run(ProblemFile pf, std::string dir) : pf_(std::move(pf)), dir_(std::move(dir)) { sync_config(); }

std::string Run::path(const std::string& name) const { return (fs::path(dir_) / name).string(); }

bool Run::has(const std::string& name) const { return fs::exists(path(name)); }

void Run::sync_config() {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorKind::IoFailure, "cannot create run directory '" + dir_ + "': " + ec.message());
    const std::string text = resolved_config(pf_).dump(2) + "\n";
    if (has("resolved-config.json") && read_file(path("resolved-config.json")) == text) return;
    for (const char* name : kArtifacts) fs::remove(path(name), ec);
    write_file(path("resolved-config.json"), text);
}

void Run::clear() {
    std::error_code ec;
    for (const char* name : kArtifacts) fs::remove(path(name), ec);
    traj_.reset();
    fa_.reset();
    series_.reset();
    sync_config();
}

const SpectralData& Run::spectral() {
    if (!sd_) {
        sd_ = decompose(pf_.matrix, pf_.snap_tol);
        write_file(path("spectral.json"), to_json(*sd_).dump(2) + "\n");
    }
    return *sd_;
}

const NonlinearitySpec& Run::spec() {
    if (!spec_) {
        ParseOptions opt;
        opt.dim = static_cast<int>(pf_.matrix.rows());
        opt.params = pf_.params;
        opt.mode = pf_.mode;
        opt.remainder_exponent = pf_.remainder_exponent;
        opt.require_smooth_norms = pf_.strict_smoothness;
        spec_ = parse_nonlinearity(pf_.nonlinearity, opt);
    }
    return *spec_;
}

const Trajectory& Run::trajectory() {
    if (traj_) return *traj_;
    if (has("trajectory.csv")) {
        traj_ = trajectory_from_csv(read_file(path("trajectory.csv")));
        if (traj_->samples.front().y.size() != pf_.y0.size())
            throw Error(ErrorKind::InvalidInput, "trajectory.csv does not match the problem dimension");
        return *traj_;
    }
    IntegratorOptions opt;
    opt.horizon = pf_.horizon;
    opt.sample_dt = pf_.sample_dt;
    opt.tol = pf_.tol;
    traj_ = integrate(spectral(), spec(), pf_.y0, opt);
    write_file(path("trajectory.csv"), trajectory_csv(*traj_));
    return *traj_;
}

const FirstApproximation& Run::first_approx() {
    if (fa_) return *fa_;
    if (has("first-approx.json")) {
        fa_ = first_approximation_from_json(read_json(path("first-approx.json")));
        return *fa_;
    }
    fa_ = first_approximation(spectral(), trajectory(), pf_.window_fraction);
    write_file(path("first-approx.json"), to_json(*fa_).dump(2) + "\n");
    const auto bounds = decay_bounds_check(spectral(), trajectory(), pf_.window_fraction);
    write_file(path("decay.json"), to_json(bounds).dump(2) + "\n");
    return *fa_;
}

Rational Run::lambda_star() {
    if (pf_.lambda_star) {
        if (spectral().index_of(*pf_.lambda_star) < 0)
            throw Error(ErrorKind::NotAnEigenvalue, "lambda_star = " + pf_.lambda_star->str() + " is not an eigenvalue of A");
        return *pf_.lambda_star;
    }
    if (spectral().distinct_count() == 1) return spectral().distinct.front();
    return first_approx().lambda_star;
}

ExponentLattice Run::lattice(int count) {
    ExpansionEngine engine(spectral(), spec(), lambda_star(), Vec::Zero(spectral().dimension), count);
    return engine.lattice();
}

Classification Run::check_regularity() {
    const auto cls = classify(spec());
    const auto& fa = first_approx();
    const auto gate = smoothness_domain_check(spec(), fa.xi);
    Json j = {{"schema_version", kSchemaVersion},
              {"classification", to_json(cls)},
              {"smoothness_at_xi", to_json(gate)},
              {"xi", to_json(fa.xi)}};
    write_file(path("regularity.json"), j.dump(2) + "\n");
    if (!gate.applicable) {
        std::string names;
        for (std::size_t i = 0; i < gate.offending.size(); ++i) names += (i ? ", " : "") + gate.offending[i];
        std::string xi;
        for (Eigen::Index i = 0; i < fa.xi.size(); ++i) xi += (i ? ", " : "") + format_double(fa.xi[i]);
        throw Error(ErrorKind::InapplicableAtXi, "the expansion theorem does not apply: " + names +
                                                     " is not smooth near xi* = (" + xi + ")");
    }
    return cls;
}

const ExpansionSeries& Run::expand() {
    if (series_) return *series_;
    const auto& fa = first_approx();
    if (pf_.lambda_star && *pf_.lambda_star != fa.lambda_star)
        throw Error(ErrorKind::InvalidInput, "lambda_star = " + pf_.lambda_star->str() +
                                                 " disagrees with the detected rate " + fa.lambda_star.str());
    ExpandOptions opt;
    opt.n_terms = pf_.n_terms;
    opt.policy = pf_.policy;
    if (pf_.policy == ResonancePolicy::Fit) opt.trajectory = &trajectory();
    series_ = asympode::expand(spectral(), spec(), fa.lambda_star, fa.xi, opt);
    emit(*series_, EmitFormat::Json, dir_);
    emit(series_->lattice, EmitFormat::Json, dir_);
    return *series_;
}

ExpansionSeries Run::load_series() const {
    if (!has("series.json"))
        throw Error(ErrorKind::MissingArtifact, "no series.json in '" + dir_ + "'; run `expand` first");
    return series_from_json(read_json(path("series.json")));
}

VerificationReport Run::verify(const ExpansionSeries& series, EmitFormat extra) {
    auto report = asympode::verify(trajectory(), series, series.size());
    const auto cls = classify(spec());
    if (!cls.lipschitz)
        report.warnings.push_back("F is only continuous near 0 (" + cls.regularity +
                                  "): solutions may be non-unique; the expansion describes this trajectory");
    if (trajectory().non_decay) report.warnings.push_back("|y| exceeded 10 |y0| during the run");
    emit(report, EmitFormat::Json, dir_);
    emit(report, EmitFormat::Csv, dir_);
    if (extra == EmitFormat::Gnuplot) emit(report, EmitFormat::Gnuplot, dir_);
    return report;
}

PipelineResult run_pipeline(const ProblemFile& pf, const std::string& dir, EmitFormat extra) {
    PipelineResult result;
    std::optional<Run> run;
    try {
        run.emplace(pf, dir);
        run->clear();
        run->spectral();
        run->spec();
        run->trajectory();
        run->first_approx();
        run->check_regularity();
        result.series = run->expand();
        if (extra != EmitFormat::Json) {
            emit(*result.series, extra, dir);
            emit(result.series->lattice, extra, dir);
        }
        result.report = run->verify(*result.series, extra);
        result.exit_code = result.report->pass ? 0 : 2;
        result.message = result.report->pass ? "verification passed" : "verification failed";
    } catch (const Error& e) {
        result.exit_code = exit_code_for(e.kind());
        result.message = std::string(to_string(e.kind())) + ": " + e.what();
        try {
            write_file((fs::path(dir) / "error.json").string(), error_record(e).dump(2) + "\n");
        } catch (const Error&) {
        }
    }
    return result;
}

}  // namespace asympode
