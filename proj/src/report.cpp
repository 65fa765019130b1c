#include "asympode/report.hpp"

#include "asympode/error.hpp"
#include "asympode/parallel.hpp"
#include "asympode/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

namespace asympode {

std::vector<double> log_residual_stream(const Trajectory& traj, const ExpansionSeries& series, int n) {
    const int terms = std::min(n, series.size());
    const double m1 = series.terms.empty() ? series.lambda_star.to_double() : series.terms.front().mu.to_double();
    std::vector<double> out(traj.samples.size());
    for (std::size_t k = 0; k < traj.samples.size(); ++k) {
        const double t = traj.samples[k].t;
        Vec w = traj.scaled(k, m1);
        for (int i = 0; i < terms; ++i) {
            const auto& term = series.terms[static_cast<std::size_t>(i)];
            if (term.q.is_zero()) continue;
            w -= term.q.eval(t) * std::exp((m1 - term.mu.to_double()) * t);
        }
        const double norm = w.norm();
        out[k] = norm > 0 ? std::log(norm) - m1 * t : -std::numeric_limits<double>::infinity();
    }
    return out;
}

namespace {

struct Window {
    std::size_t begin = 0;
    std::size_t end = 0;  // exclusive
};

/// Longest run of consecutive admissible samples.
Window longest_run(const std::vector<bool>& ok) {
    Window best, cur;
    for (std::size_t k = 0; k <= ok.size(); ++k) {
        if (k < ok.size() && ok[k]) {
            if (cur.end != k) cur.begin = k;
            cur.end = k + 1;
            continue;
        }
        if (cur.end - cur.begin > best.end - best.begin) best = cur;
        cur = {k + 1, k + 1};
    }
    return best;
}

double mean_abs(const std::vector<double>& logs, std::size_t begin, std::size_t end) {
    double s = 0;
    for (std::size_t k = begin; k < end; ++k) s += std::exp(logs[k]);
    return end > begin ? s / static_cast<double>(end - begin) : 0.0;
}

ResidualFit fit_stream(const Trajectory& traj, const ExpansionSeries& series, int n, const std::vector<double>& logs,
                       const VerifyOptions& opt) {
    ResidualFit fit;
    fit.n = n;
    const auto& term = series.terms[static_cast<std::size_t>(n - 1)];
    fit.mu_n = term.mu;
    const VectorPolynomial* next_q = nullptr;
    if (n < series.size()) {
        const auto& next = series.terms[static_cast<std::size_t>(n)];
        fit.mu_next = next.mu;
        fit.next = next.q.is_zero() ? ResidualFit::Zero : ResidualFit::NonZero;
        if (!next.q.is_zero()) next_q = &next.q;
    } else if (n < series.lattice.size()) {
        fit.mu_next = series.lattice.elements[static_cast<std::size_t>(n)].mu;
    }
    const double mu_n = fit.mu_n.to_double();
    const double gap = fit.mu_next ? (*fit.mu_next - fit.mu_n).to_double() : 0.0;
    fit.margin = 0.25 * gap;
    if (fit.mu_next) fit.tolerance = std::max(0.05 * fit.mu_next->to_double(), 0.5 * gap);

    double y0 = traj.y0_norm;
    if (!(y0 > 0) && !traj.samples.empty()) y0 = std::exp(traj.samples.front().log_norm);
    const double upper = std::log(opt.upper_fraction * y0);
    const double noise = std::log(opt.noise_factor * std::max(traj.tol.rel, 1e-15));
    std::vector<bool> ok(logs.size());
    std::vector<double> shift(logs.size(), 0.0);
    for (std::size_t k = 0; k < logs.size(); ++k) {
        bool good = std::isfinite(logs[k]) && logs[k] <= upper && logs[k] >= noise + traj.samples[k].log_norm;
        if (good && next_q != nullptr && next_q->degree() > 0) {
            const double qn = next_q->eval(traj.samples[k].t).norm();
            good = qn > 0;
            if (good) shift[k] = std::log(qn);
        }
        ok[k] = good;
    }
    const Window w = longest_run(ok);
    fit.samples = static_cast<int>(w.end - w.begin);
    if (fit.samples > 0) {
        fit.window_start = traj.samples[w.begin].t;
        fit.window_end = traj.samples[w.end - 1].t;
    }
    if (fit.samples < opt.min_samples) {
        fit.vacuous = true;
        fit.pass = true;
        fit.note = std::string(to_string(ErrorKind::ResidualUnderflow)) + ": only " + std::to_string(fit.samples) +
                   " samples above the noise floor; vacuous pass";
        return fit;
    }
    std::vector<double> x, y;
    for (std::size_t k = w.begin; k < w.end; ++k) {
        x.push_back(traj.samples[k].t);
        y.push_back(logs[k] - shift[k]);
    }
    std::tie(fit.slope, fit.intercept) = fit_line(x, y);
    const bool decays = fit.slope <= -(mu_n + fit.margin);
    bool rate = true;
    if (fit.next == ResidualFit::NonZero) rate = std::fabs(fit.slope + fit.mu_next->to_double()) <= fit.tolerance;
    fit.pass = decays && rate;
    if (!decays)
        fit.note = "residual does not decay faster than e^{-" + fit.mu_n.str() + " t}";
    else if (!rate)
        fit.note = "slope " + format_double(fit.slope) + " differs from -" + fit.mu_next->str() + " by more than " +
                   format_double(fit.tolerance);
    return fit;
}

}  // namespace

VerificationReport verify(const Trajectory& traj, const ExpansionSeries& series, int n_max,
                          const VerifyOptions& options) {
    VerificationReport rep;
    rep.policy = series.policy;
    rep.tol = traj.tol;
    rep.lattice_window = series.lattice.window_max();
    const int n = std::min(n_max, series.size());
    if (n < 1) throw Error(ErrorKind::InvalidInput, "nothing to verify: the series is empty");
    for (const auto& s : traj.samples) rep.t.push_back(s.t);
    const int streams = std::min(n + 1, series.size());
    auto map = [&](std::size_t count, auto fn) { return options.parallel ? parallel_map(count, fn) : serial_map(count, fn); };
    rep.log_residuals = map(static_cast<std::size_t>(streams), [&](std::size_t i) {
        return log_residual_stream(traj, series, static_cast<int>(i) + 1);
    });
    rep.fits = map(static_cast<std::size_t>(n), [&](std::size_t i) {
        return fit_stream(traj, series, static_cast<int>(i) + 1, rep.log_residuals[i], options);
    });
    rep.log_residuals.resize(static_cast<std::size_t>(n));
    for (int i = 0; i + 1 < streams && i < n; ++i) {
        auto& fit = rep.fits[static_cast<std::size_t>(i)];
        if (fit.vacuous) continue;
        const std::size_t end = 1 + static_cast<std::size_t>(std::lower_bound(rep.t.begin(), rep.t.end(), fit.window_end) -
                                                             rep.t.begin());
        const std::size_t len = static_cast<std::size_t>(fit.samples);
        const std::size_t begin = end - std::max<std::size_t>(1, len / 4);
        const std::vector<double> next = log_residual_stream(traj, series, i + 2);
        fit.improves = mean_abs(next, begin, end) <= mean_abs(rep.log_residuals[static_cast<std::size_t>(i)], begin, end);
    }
    for (const auto& f : rep.fits) rep.pass = rep.pass && f.pass;
    bool resonant = false;
    for (const auto& t : series.terms)
        if (t.n > 1 && !t.resonant_blocks.empty()) resonant = true;
    if (series.policy == ResonancePolicy::Zero && resonant)
        rep.warnings.push_back(
            "zero resonance policy with resonant terms: the series is the formal normal form; resonant constants "
            "were not fitted to this trajectory");
    for (const auto& f : rep.fits)
        if (f.vacuous) rep.warnings.push_back("N=" + std::to_string(f.n) + ": " + f.note);
    return rep;
}

EmitFormat parse_format(const std::string& name) {
    if (name == "json") return EmitFormat::Json;
    if (name == "csv") return EmitFormat::Csv;
    if (name == "gnuplot" || name == "gnuplot-data") return EmitFormat::Gnuplot;
    throw Error(ErrorKind::InvalidInput, "unknown format '" + name + "' (expected json, csv or gnuplot)");
}

namespace {

std::string in_dir(const std::string& dir, const std::string& name) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::IoFailure, "cannot create directory '" + dir + "': " + ec.message());
    return (std::filesystem::path(dir) / name).string();
}

Json report_json(const VerificationReport& r) {
    Json fits = Json::array();
    for (const auto& f : r.fits) {
        Json j = {{"n", f.n},
                  {"mu_n", to_json(f.mu_n)},
                  {"mu_next", f.mu_next ? to_json(*f.mu_next) : Json(nullptr)},
                  {"next_term", f.next == ResidualFit::Zero      ? "zero"
                                : f.next == ResidualFit::NonZero ? "nonzero"
                                                                 : "unknown"},
                  {"slope", f.slope},
                  {"intercept", f.intercept},
                  {"samples", f.samples},
                  {"window", {f.window_start, f.window_end}},
                  {"margin", f.margin},
                  {"tolerance", f.tolerance},
                  {"vacuous", f.vacuous},
                  {"improves_on_next", f.improves ? Json(*f.improves) : Json(nullptr)},
                  {"pass", f.pass},
                  {"note", f.note}};
        fits.push_back(std::move(j));
    }
    return {{"schema_version", kSchemaVersion},
            {"resonance_policy", policy_name(r.policy)},
            {"tolerances", {{"abs", r.tol.abs}, {"rel", r.tol.rel}}},
            {"lattice_window", to_json(r.lattice_window)},
            {"pass", r.pass},
            {"warnings", r.warnings},
            {"fits", fits}};
}

std::string residual_table(const VerificationReport& r, char sep, bool comment_header) {
    std::ostringstream out;
    if (comment_header) out << "# ";
    out << "t";
    for (std::size_t n = 0; n < r.log_residuals.size(); ++n) out << sep << "|u_" << n + 1 << "|";
    out << '\n';
    for (std::size_t k = 0; k < r.t.size(); ++k) {
        out << format_double(r.t[k]);
        for (const auto& s : r.log_residuals) out << sep << format_double(std::exp(s[k]));
        out << '\n';
    }
    return out.str();
}

}  // namespace

std::string emit(const VerificationReport& report, EmitFormat format, const std::string& dir) {
    std::string path;
    switch (format) {
        case EmitFormat::Json:
            path = in_dir(dir, "report.json");
            write_file(path, report_json(report).dump(2) + "\n");
            break;
        case EmitFormat::Csv:
            path = in_dir(dir, "residuals.csv");
            write_file(path, residual_table(report, ',', false));
            break;
        case EmitFormat::Gnuplot:
            path = in_dir(dir, "residuals.dat");
            write_file(path, residual_table(report, ' ', true));
            break;
    }
    return path;
}

std::string emit(const ExpansionSeries& series, EmitFormat format, const std::string& dir) {
    if (format == EmitFormat::Json) {
        const std::string path = in_dir(dir, "series.json");
        write_file(path, to_json(series).dump(2) + "\n");
        return path;
    }
    const char sep = format == EmitFormat::Csv ? ',' : ' ';
    std::ostringstream out;
    if (format == EmitFormat::Gnuplot) out << "# ";
    out << "n" << sep << "mu" << sep << "power";
    for (Eigen::Index i = 0; i < series.xi.size(); ++i) out << sep << "c_" << i + 1;
    out << '\n';
    for (const auto& t : series.terms)
        for (int k = 0; k <= t.q.degree(); ++k) {
            out << t.n << sep << t.mu.str() << sep << k;
            const Vec c = t.q.coeff(k);
            for (Eigen::Index i = 0; i < c.size(); ++i) out << sep << format_double(c[i]);
            out << '\n';
        }
    const std::string path = in_dir(dir, format == EmitFormat::Csv ? "series.csv" : "series.dat");
    write_file(path, out.str());
    return path;
}

std::string emit(const ExponentLattice& lattice, EmitFormat format, const std::string& dir) {
    if (format == EmitFormat::Json) {
        const std::string path = in_dir(dir, "lattice.json");
        write_file(path, to_json(lattice).dump(2) + "\n");
        return path;
    }
    const std::string path = in_dir(dir, "lattice.txt");
    write_file(path, lattice_table(lattice));
    return path;
}

std::string lattice_table(const ExponentLattice& lattice) {
    std::ostringstream out;
    out << "# lambda* = " << lattice.lambda_star << ", generators:";
    for (std::size_t g = 0; g < lattice.generators.size(); ++g)
        out << (g ? ", " : " ") << lattice.generators[g].label() << " = " << lattice.generators[g].value;
    if (lattice.finite) out << " (finite set)";
    out << "\n";
    out << "n\tmu_tilde\tmu\tdecompositions\n";
    for (std::size_t n = 0; n < lattice.elements.size(); ++n) {
        const auto& e = lattice.elements[n];
        out << n + 1 << '\t' << e.tilde << '\t' << e.mu << '\t';
        if (e.tilde.is_zero()) {
            out << "0";
        } else {
            const std::size_t shown = std::min<std::size_t>(e.decompositions.size(), 4);
            for (std::size_t k = 0; k < shown; ++k) {
                if (k) out << " | ";
                bool first = true;
                for (std::size_t g = 0; g < e.decompositions[k].size(); ++g) {
                    const int m = e.decompositions[k][g];
                    if (m == 0) continue;
                    out << (first ? "" : " + ");
                    if (m != 1) out << m << '*';
                    out << lattice.generators[g].label();
                    first = false;
                }
            }
            if (e.decompositions.size() > shown || e.decompositions_truncated)
                out << " | ... (" << e.decompositions.size() << (e.decompositions_truncated ? "+" : "") << " total)";
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace asympode
