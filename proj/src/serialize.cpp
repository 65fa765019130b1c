#include "asympode/serialize.hpp"

#include "asympode/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace asympode {

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

Json to_json(const Rational& r) { return r.str(); }

Rational rational_from_json(const Json& j) {
    if (j.is_string()) return Rational::parse(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
    throw Error(ErrorKind::InvalidInput, "expected a rational string, got " + j.dump());
}

Json to_json(const Vec& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

Vec vec_from_json(const Json& j) {
    if (!j.is_array()) throw Error(ErrorKind::InvalidInput, "expected a numeric array, got " + j.dump());
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw Error(ErrorKind::InvalidInput, "non-numeric vector entry " + j[i].dump());
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

Json to_json(const Mat& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(to_json(Vec(m.row(i).transpose())));
    return rows;
}

Json to_json(const VectorPolynomial& p) {
    Json cols = Json::array();
    for (int k = 0; k <= p.degree(); ++k) cols.push_back(to_json(p.coeff(k)));
    return cols;
}

VectorPolynomial polynomial_from_json(const Json& j, int dim) {
    if (!j.is_array()) throw Error(ErrorKind::InvalidInput, "expected polynomial coefficient columns");
    if (j.empty()) return VectorPolynomial(dim);
    Mat c(dim, static_cast<Eigen::Index>(j.size()));
    for (std::size_t k = 0; k < j.size(); ++k) {
        const Vec v = vec_from_json(j[k]);
        if (v.size() != dim) throw Error(ErrorKind::InvalidInput, "polynomial coefficient has the wrong dimension");
        c.col(static_cast<Eigen::Index>(k)) = v;
    }
    return VectorPolynomial(std::move(c));
}

Json to_json(const SpectralData& sd) {
    Json out;
    out["schema_version"] = kSchemaVersion;
    out["dimension"] = sd.dimension;
    out["matrix"] = to_json(sd.matrix);
    Json eig = Json::array();
    for (int j = 0; j < sd.distinct_count(); ++j) {
        const auto js = static_cast<std::size_t>(j);
        Json basis = Json::array();
        for (Eigen::Index c = 0; c < sd.eigenvectors[js].cols(); ++c)
            basis.push_back(to_json(Vec(sd.eigenvectors[js].col(c))));
        eig.push_back({{"lambda", to_json(sd.distinct[js])},
                       {"lambda_float", sd.distinct_float[js]},
                       {"multiplicity", sd.multiplicity[js]},
                       {"basis", basis},
                       {"projection", to_json(sd.projections[js])}});
    }
    out["eigenvalues"] = eig;
    out["c0"] = sd.c0;
    out["snap_warning"] = sd.snap_warning;
    return out;
}

Json to_json(const ExponentLattice& lattice) {
    Json out;
    out["schema_version"] = kSchemaVersion;
    out["lambda_star"] = to_json(lattice.lambda_star);
    out["n0"] = lattice.n0;
    out["finite"] = lattice.finite;
    Json gens = Json::array();
    for (const auto& g : lattice.generators)
        gens.push_back({{"kind", g.kind == Generator::EigenGap ? "eigen_gap" : "degree"},
                        {"index", g.index},
                        {"value", to_json(g.value)},
                        {"source", to_json(g.source)},
                        {"label", g.label()}});
    out["generators"] = gens;
    Json els = Json::array();
    for (const auto& e : lattice.elements)
        els.push_back({{"tilde", to_json(e.tilde)},
                       {"mu", to_json(e.mu)},
                       {"decompositions", e.decompositions},
                       {"decompositions_truncated", e.decompositions_truncated}});
    out["elements"] = els;
    return out;
}

ExponentLattice lattice_from_json(const Json& j) {
    ExponentLattice l;
    l.lambda_star = rational_from_json(j.at("lambda_star"));
    l.n0 = j.at("n0").get<int>();
    l.finite = j.at("finite").get<bool>();
    for (const auto& g : j.at("generators")) {
        Generator gen;
        gen.kind = g.at("kind").get<std::string>() == "degree" ? Generator::Degree : Generator::EigenGap;
        gen.index = g.at("index").get<int>();
        gen.value = rational_from_json(g.at("value"));
        gen.source = rational_from_json(g.at("source"));
        l.generators.push_back(gen);
    }
    for (const auto& e : j.at("elements")) {
        LatticeElement el;
        el.tilde = rational_from_json(e.at("tilde"));
        el.mu = rational_from_json(e.at("mu"));
        el.decompositions = e.at("decompositions").get<std::vector<std::vector<int>>>();
        el.decompositions_truncated = e.at("decompositions_truncated").get<bool>();
        l.elements.push_back(std::move(el));
    }
    return l;
}

Json to_json(const ExpansionSeries& s) {
    Json out;
    out["schema_version"] = kSchemaVersion;
    out["lambda_star"] = to_json(s.lambda_star);
    out["xi"] = to_json(s.xi);
    out["policy"] = policy_name(s.policy);
    out["mode"] = mode_name(s.mode);
    out["n_bar"] = s.n_bar ? Json(*s.n_bar) : Json(nullptr);
    out["warnings"] = s.warnings;
    out["lattice"] = to_json(s.lattice);
    Json terms = Json::array();
    for (const auto& t : s.terms) {
        Json consts = Json::array();
        for (const auto& c : t.resonant_constants) consts.push_back(to_json(c));
        terms.push_back({{"n", t.n},
                         {"tilde", to_json(t.tilde)},
                         {"mu", to_json(t.mu)},
                         {"degree", t.q.degree()},
                         {"q", to_json(t.q)},
                         {"j", to_json(t.j)},
                         {"resonant_blocks", t.resonant_blocks},
                         {"resonant_constants", consts},
                         {"contributions", t.contributions}});
    }
    out["terms"] = terms;
    return out;
}

ExpansionSeries series_from_json(const Json& j) {
    try {
        if (j.at("schema_version").get<int>() != kSchemaVersion)
            throw Error(ErrorKind::InvalidInput, "unsupported series schema version");
        ExpansionSeries s;
        s.lambda_star = rational_from_json(j.at("lambda_star"));
        s.xi = vec_from_json(j.at("xi"));
        s.policy = parse_policy(j.at("policy").get<std::string>());
        s.mode = parse_mode(j.at("mode").get<std::string>());
        if (!j.at("n_bar").is_null()) s.n_bar = j.at("n_bar").get<int>();
        s.warnings = j.at("warnings").get<std::vector<std::string>>();
        s.lattice = lattice_from_json(j.at("lattice"));
        const int d = static_cast<int>(s.xi.size());
        for (const auto& t : j.at("terms")) {
            ExpansionTerm term;
            term.n = t.at("n").get<int>();
            term.tilde = rational_from_json(t.at("tilde"));
            term.mu = rational_from_json(t.at("mu"));
            term.q = polynomial_from_json(t.at("q"), d);
            term.j = polynomial_from_json(t.at("j"), d);
            term.resonant_blocks = t.at("resonant_blocks").get<std::vector<int>>();
            for (const auto& c : t.at("resonant_constants")) term.resonant_constants.push_back(vec_from_json(c));
            term.contributions = t.at("contributions").get<int>();
            s.terms.push_back(std::move(term));
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidInput, std::string("malformed series: ") + e.what());
    }
}

Json to_json(const FirstApproximation& fa) {
    return {{"schema_version", kSchemaVersion},
            {"lambda_star", to_json(fa.lambda_star)},
            {"lambda_star_float", fa.lambda_star_float},
            {"n0", fa.n0},
            {"xi", to_json(fa.xi)},
            {"eigen_residual", fa.eigen_residual},
            {"dirichlet_median", fa.dirichlet_median},
            {"dirichlet_spread", fa.dirichlet_spread},
            {"window_start", fa.window_start},
            {"window_end", fa.window_end},
            {"convergence_slope", fa.convergence_slope},
            {"tail_dirichlet", fa.tail_dirichlet}};
}

FirstApproximation first_approximation_from_json(const Json& j) {
    try {
        FirstApproximation fa;
        fa.lambda_star = rational_from_json(j.at("lambda_star"));
        fa.lambda_star_float = j.at("lambda_star_float").get<double>();
        fa.n0 = j.at("n0").get<int>();
        fa.xi = vec_from_json(j.at("xi"));
        fa.eigen_residual = j.at("eigen_residual").get<double>();
        fa.dirichlet_median = j.at("dirichlet_median").get<double>();
        fa.dirichlet_spread = j.at("dirichlet_spread").get<double>();
        fa.window_start = j.at("window_start").get<double>();
        fa.window_end = j.at("window_end").get<double>();
        fa.convergence_slope = j.at("convergence_slope").get<double>();
        fa.tail_dirichlet = j.at("tail_dirichlet").get<std::vector<double>>();
        return fa;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidInput, std::string("malformed first approximation: ") + e.what());
    }
}

Json to_json(const DecayBoundsReport& r) {
    return {{"slope", r.slope}, {"intercept", r.intercept}, {"lower", r.lower}, {"upper", r.upper},
            {"delta", r.delta}, {"c1", r.c1},               {"c2", r.c2},       {"pass", r.pass}};
}

Json to_json(const SmoothnessReport& r) {
    Json verdicts = Json::array();
    for (const auto& v : r.verdicts) verdicts.push_back({{"factor", v.factor}, {"smooth", v.smooth}, {"reason", v.reason}});
    return {{"applicable", r.applicable}, {"offending", r.offending}, {"message", r.message}, {"factors", verdicts}};
}

Json to_json(const Classification& c) {
    return {{"regularity", c.regularity}, {"lipschitz", c.lipschitz}, {"notes", c.notes}};
}

Json to_json(const DerivativeTensor& t) {
    Json entries = Json::array();
    for (std::size_t i = 0; i < t.indices.size(); ++i)
        entries.push_back({{"index", t.indices[i]}, {"value", to_json(t.entries[i])}});
    return {{"order", t.order}, {"dim", t.dim}, {"base", to_json(t.base)}, {"norm_bound", t.norm_bound},
            {"entries", entries}};
}

std::string trajectory_csv(const Trajectory& traj) {
    std::ostringstream out;
    out << "# method=" << traj.method << " tol_abs=" << format_double(traj.tol.abs)
        << " tol_rel=" << format_double(traj.tol.rel) << " accepted=" << traj.accepted_steps
        << " rejected=" << traj.rejected_steps << " rhs=" << traj.rhs_evaluations
        << " termination=" << termination_name(traj.reason) << " non_decay=" << (traj.non_decay ? 1 : 0)
        << " y0_norm=" << format_double(traj.y0_norm) << "\n";
    const int d = traj.samples.empty() ? 0 : static_cast<int>(traj.samples.front().y.size());
    out << "t";
    for (int i = 1; i <= d; ++i) out << ",y_" << i;
    out << ",norm,dirichlet_quotient,log_norm\n";
    for (const auto& s : traj.samples) {
        out << format_double(s.t);
        for (int i = 0; i < d; ++i) out << ',' << format_double(s.y[i]);
        out << ',' << format_double(std::exp(s.log_norm)) << ',' << format_double(s.dirichlet) << ','
            << format_double(s.log_norm) << '\n';
    }
    return out.str();
}

namespace {

double parse_double(const std::string& s) {
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != s.size() || s.empty()) throw Error(ErrorKind::InvalidInput, "bad number '" + s + "' in trajectory");
    return v;
}

}  // namespace

Trajectory trajectory_from_csv(const std::string& text) {
    Trajectory traj;
    std::istringstream in(text);
    std::string line;
    int d = -1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream meta(line.substr(1));
            std::string kv;
            while (meta >> kv) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
                if (key == "method") traj.method = val;
                else if (key == "tol_abs") traj.tol.abs = parse_double(val);
                else if (key == "tol_rel") traj.tol.rel = parse_double(val);
                else if (key == "accepted") traj.accepted_steps = std::stol(val);
                else if (key == "rejected") traj.rejected_steps = std::stol(val);
                else if (key == "rhs") traj.rhs_evaluations = std::stol(val);
                else if (key == "non_decay") traj.non_decay = val == "1";
                else if (key == "y0_norm") traj.y0_norm = parse_double(val);
                else if (key == "termination") {
                    for (auto t : {Termination::Horizon, Termination::MagnitudeFloor, Termination::StepFailure,
                                   Termination::Divergence})
                        if (termination_name(t) == val) traj.reason = t;
                }
            }
            continue;
        }
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream row(line);
        while (std::getline(row, cell, ',')) cells.push_back(cell);
        if (d < 0) {
            d = static_cast<int>(cells.size()) - 4;
            if (d < 1 || cells[0] != "t") throw Error(ErrorKind::InvalidInput, "trajectory header is malformed");
            continue;
        }
        if (static_cast<int>(cells.size()) != d + 4)
            throw Error(ErrorKind::InvalidInput, "trajectory row has " + std::to_string(cells.size()) + " columns");
        Sample s;
        s.t = parse_double(cells[0]);
        s.y.resize(d);
        for (int i = 0; i < d; ++i) s.y[i] = parse_double(cells[static_cast<std::size_t>(i + 1)]);
        s.dirichlet = parse_double(cells[static_cast<std::size_t>(d + 2)]);
        s.log_norm = parse_double(cells[static_cast<std::size_t>(d + 3)]);
        traj.samples.push_back(std::move(s));
    }
    if (traj.samples.empty()) throw Error(ErrorKind::InvalidInput, "trajectory has no samples");
    return traj;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoFailure, "cannot open '" + path + "' for writing");
    out << content;
    out.flush();
    if (!out) throw Error(ErrorKind::IoFailure, "write to '" + path + "' failed");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoFailure, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Json read_json(const std::string& path) {
    const std::string text = read_file(path);
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::InvalidInput, "'" + path + "' is not valid JSON: " + e.what());
    }
}

}  // namespace asympode
