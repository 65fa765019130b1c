#include "asympode/error.hpp"
#include "asympode/problem.hpp"
#include "asympode/report.hpp"
#include "asympode/serialize.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

using namespace asympode;

namespace {

struct Overrides {
    std::string problem;
    std::string out;
    std::optional<int> n_terms;
    std::optional<std::string> resonance;
    std::optional<double> horizon;
    std::optional<double> tol_abs;
    std::optional<double> tol_rel;
    std::optional<double> snap_tol;
    std::string format = "json";
    int count = 10;
};

ProblemFile load(const Overrides& o) {
    Json j = read_json(o.problem);
    if (!j.is_object()) throw Error(ErrorKind::InvalidInput, "problem file must be a JSON object");
    if (o.n_terms) j["n_terms"] = *o.n_terms;
    if (o.resonance) j["resonance"] = *o.resonance;
    if (o.horizon) j["horizon"] = *o.horizon;
    if (o.tol_abs) j["tolerances"]["abs"] = *o.tol_abs;
    if (o.tol_rel) j["tolerances"]["rel"] = *o.tol_rel;
    if (o.snap_tol) j["tolerances"]["snap"] = *o.snap_tol;
    ProblemFile pf = parse_problem(j);
    if (!o.out.empty()) pf.output_dir = o.out;
    return pf;
}

std::string vec_str(const Vec& v) {
    std::string s = "(";
    for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
    return s + ")";
}

std::string poly_str(const VectorPolynomial& q) {
    if (q.is_zero()) return "0";
    std::string s;
    for (int k = 0; k <= q.degree(); ++k) {
        if (k) s += " + ";
        s += vec_str(q.coeff(k));
        if (k == 1) s += " t";
        if (k > 1) s += " t^" + std::to_string(k);
    }
    return s;
}

void print_series(const ExpansionSeries& s) {
    std::cout << "lambda* = " << s.lambda_star << ", xi* = " << vec_str(s.xi) << ", resonance = "
              << policy_name(s.policy);
    if (s.n_bar) std::cout << ", N-bar = " << *s.n_bar;
    std::cout << "\n";
    for (const auto& t : s.terms) {
        std::cout << "q_" << t.n << " (mu = " << t.mu << "): " << poly_str(t.q);
        if (!t.resonant_blocks.empty() && t.n > 1) std::cout << "  [resonant]";
        std::cout << "\n";
    }
    for (const auto& w : s.warnings) std::cout << "warning: " << w << "\n";
}

void print_report(const VerificationReport& r) {
    for (const auto& f : r.fits) {
        std::cout << "N=" << f.n << " mu_N=" << f.mu_n;
        if (f.vacuous) {
            std::cout << " vacuous pass (" << f.note << ")\n";
            continue;
        }
        std::cout << " slope=" << format_double(f.slope);
        if (f.mu_next) std::cout << " expected -" << *f.mu_next;
        std::cout << " samples=" << f.samples << " window=[" << format_double(f.window_start) << ", "
                  << format_double(f.window_end) << "] " << (f.pass ? "PASS" : "FAIL");
        if (!f.note.empty()) std::cout << " (" << f.note << ")";
        std::cout << "\n";
    }
    for (const auto& w : r.warnings) std::cout << "warning: " << w << "\n";
    std::cout << "verification " << (r.pass ? "passed" : "failed") << "\n";
}

int fail(const Error& e, const std::string& dir) {
    std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    if (!dir.empty()) {
        try {
            std::error_code ec;
            std::filesystem::create_directories(dir, ec);
            write_file((std::filesystem::path(dir) / "error.json").string(), error_record(e).dump(2) + "\n");
        } catch (const Error&) {
        }
    }
    return exit_code_for(e.kind());
}

int dispatch(const std::string& command, const Overrides& o) {
    std::string dir = o.out;
    try {
        const ProblemFile pf = load(o);
        dir = pf.output_dir;
        const EmitFormat format = parse_format(o.format);
        if (command == "run") {
            const auto result = run_pipeline(pf, dir, format);
            if (result.series) print_series(*result.series);
            if (result.report) print_report(*result.report);
            if (result.exit_code == 1 || result.exit_code == 3) std::cerr << "error: " << result.message << "\n";
            return result.exit_code;
        }
        Run run(pf, dir);
        if (command == "spectral") {
            const auto& sd = run.spectral();
            std::cout << "lambda\tmultiplicity\tbasis\n";
            for (int j = 0; j < sd.distinct_count(); ++j) {
                const auto js = static_cast<std::size_t>(j);
                std::cout << sd.distinct[js] << '\t' << sd.multiplicity[js] << '\t';
                for (Eigen::Index c = 0; c < sd.eigenvectors[js].cols(); ++c)
                    std::cout << (c ? " " : "") << vec_str(sd.eigenvectors[js].col(c));
                std::cout << '\n';
            }
            std::cout << "c0 = " << format_double(sd.c0) << (sd.snap_warning ? " (snap warning)" : "") << "\n";
        } else if (command == "exponents") {
            const auto lattice = run.lattice(o.count);
            std::cout << lattice_table(lattice);
            emit(lattice, EmitFormat::Csv, dir);
        } else if (command == "simulate") {
            const auto& traj = run.trajectory();
            const auto& last = traj.samples.back();
            std::cout << "samples=" << traj.samples.size() << " t_end=" << format_double(last.t)
                      << " |y(t_end)|=" << format_double(std::exp(last.log_norm))
                      << " termination=" << termination_name(traj.reason) << " accepted=" << traj.accepted_steps
                      << " rejected=" << traj.rejected_steps << (traj.non_decay ? " non-decay" : "") << "\n";
        } else if (command == "first-approx") {
            const auto& fa = run.first_approx();
            std::cout << "lambda* = " << fa.lambda_star << " (n0 = " << fa.n0 + 1 << ")\n"
                      << "xi* = " << vec_str(fa.xi) << "\n"
                      << "eigen residual = " << format_double(fa.eigen_residual) << "\n"
                      << "Dirichlet median = " << format_double(fa.dirichlet_median)
                      << ", spread = " << format_double(fa.dirichlet_spread) << "\n"
                      << "window = [" << format_double(fa.window_start) << ", " << format_double(fa.window_end)
                      << "], convergence slope = " << format_double(fa.convergence_slope) << "\n";
            if (run.has("decay.json")) {
                const Json d = read_json(run.path("decay.json"));
                std::cout << "decay slope = " << d.at("slope") << " in [" << d.at("lower") << ", " << d.at("upper")
                          << "]: " << (d.at("pass").get<bool>() ? "PASS" : "FAIL") << "\n";
            }
        } else if (command == "expand") {
            const auto cls = run.check_regularity();
            std::cout << "regularity: " << cls.regularity << "\n";
            const auto& series = run.expand();
            if (format != EmitFormat::Json) {
                emit(series, format, dir);
                emit(series.lattice, format, dir);
            }
            print_series(series);
        } else if (command == "verify") {
            const auto series = run.load_series();
            const auto report = run.verify(series, format);
            print_report(report);
            return report.pass ? 0 : 2;
        }
        return 0;
    } catch (const Error& e) {
        return fail(e, dir);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Asymptotic expansions of decaying solutions of y' + Ay = F(y)"};
    app.require_subcommand(1);
    Overrides o;
    std::string command;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"spectral", "Eigenvalues, eigenspaces and projections of A"},
        {"exponents", "Rate lattice S (table)"},
        {"simulate", "Integrate the trajectory and write trajectory.csv"},
        {"first-approx", "Detect lambda* and xi* from the trajectory"},
        {"expand", "Compute q_1..q_N"},
        {"verify", "Check the series against the trajectory"},
        {"run", "Full pipeline over a fresh run directory"}};
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--problem", o.problem, "Problem file (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "Run directory (overrides output_dir)");
        sub->add_option("--n-terms", o.n_terms, "Number of expansion terms N");
        sub->add_option("--resonance", o.resonance, "Resonance policy: zero or fit");
        sub->add_option("--horizon", o.horizon, "Integration horizon T");
        sub->add_option("--tol-abs", o.tol_abs, "Integrator absolute tolerance");
        sub->add_option("--tol-rel", o.tol_rel, "Integrator relative tolerance");
        sub->add_option("--snap-tol", o.snap_tol, "Eigenvalue snapping tolerance");
        sub->add_option("--format", o.format, "Extra output format: json, csv or gnuplot");
        if (name == "exponents") sub->add_option("--count", o.count, "Number of lattice elements")->check(CLI::Range(1, 100000));
        sub->callback([&command, name = name] { command = name; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    return dispatch(command, o);
}
