#include "asympode/termlang.hpp"

#include "asympode/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

namespace asympode {

namespace {

std::string fmt_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string fmt_matrix(const Mat& m) {
    std::string s = "{";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (i) s += ",";
        s += "{";
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) s += ",";
            s += fmt_double(m(i, j));
        }
        s += "}";
    }
    return s + "}";
}

bool is_even_integer(const Rational& r) { return r.is_integer() && r.num() % 2 == 0; }

// sum |y_l|^p raised to nu/p, with the conventions x^0 = 1 and 0^{negative} = inf.
double lp_power(const Vec& y, const Rational& p, const Rational& nu) {
    if (nu.is_zero()) return 1.0;
    const double pd = p.to_double();
    double s = 0;
    if (p == Rational(2)) {
        s = y.squaredNorm();
    } else {
        for (Eigen::Index i = 0; i < y.size(); ++i) s += std::pow(std::fabs(y[i]), pd);
    }
    if (s == 0) return nu.sign() > 0 ? 0.0 : HUGE_VAL;
    return std::pow(s, nu.to_double() / pd);
}

Vec apply_matrix(const Mat& m, const Vec& x) { return m.size() == 0 ? x : Vec(m * x); }

bool matrix_equal(const Mat& a, const Mat& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 || a == b);
}

bool matrix_less(const Mat& a, const Mat& b) {
    if (a.rows() != b.rows()) return a.rows() < b.rows();
    if (a.cols() != b.cols()) return a.cols() < b.cols();
    for (Eigen::Index i = 0; i < a.size(); ++i)
        if (a.data()[i] != b.data()[i]) return a.data()[i] < b.data()[i];
    return false;
}

bool polys_less(const std::vector<ScalarPoly>& a, const std::vector<ScalarPoly>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Same base: factors that merge by adding exponents.
bool same_base(const ScalarFactor& a, const ScalarFactor& b) {
    if (a.index() != b.index()) return false;
    if (auto* na = std::get_if<NormPower>(&a)) {
        const auto& nb = std::get<NormPower>(b);
        return na->p == nb.p && matrix_equal(na->matrix, nb.matrix);
    }
    if (auto* ca = std::get_if<CoordPower>(&a)) return ca->index == std::get<CoordPower>(b).index;
    const auto& pa = std::get<PolyNormPower>(a);
    const auto& pb = std::get<PolyNormPower>(b);
    return pa.p == pb.p && pa.polys == pb.polys;
}

ScalarPoly linear_row(const Mat& m, int row, int dim) {
    ScalarPoly out(dim);
    for (int j = 0; j < dim; ++j) {
        if (m.size() == 0) {
            if (j == row) out.add_term([&] { Monomial mm(dim, 0); mm[j] = 1; return mm; }(), 1.0);
        } else if (m(row, j) != 0) {
            Monomial mm(dim, 0);
            mm[j] = 1;
            out.add_term(mm, m(row, j));
        }
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------- ScalarPoly

ScalarPoly ScalarPoly::constant(int dim, double c) {
    ScalarPoly p(dim);
    p.add_term(Monomial(dim, 0), c);
    return p;
}

ScalarPoly ScalarPoly::variable(int dim, int i) {
    ScalarPoly p(dim);
    Monomial m(dim, 0);
    m[i] = 1;
    p.add_term(m, 1.0);
    return p;
}

int ScalarPoly::degree() const {
    int deg = -1;
    for (const auto& [m, c] : terms_) {
        int s = 0;
        for (int e : m) s += e;
        deg = std::max(deg, s);
    }
    return deg;
}

bool ScalarPoly::is_homogeneous() const {
    int deg = -1;
    for (const auto& [m, c] : terms_) {
        int s = 0;
        for (int e : m) s += e;
        if (deg >= 0 && s != deg) return false;
        deg = s;
    }
    return true;
}

std::optional<double> ScalarPoly::as_constant() const {
    if (terms_.empty()) return 0.0;
    if (terms_.size() == 1 && degree() == 0) return terms_.begin()->second;
    return std::nullopt;
}

void ScalarPoly::add_term(const Monomial& m, double c) {
    if (c == 0) return;
    auto [it, inserted] = terms_.emplace(m, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0) terms_.erase(it);
    }
}

double ScalarPoly::eval(const Vec& x) const {
    double s = 0;
    for (const auto& [m, c] : terms_) {
        double v = c;
        for (int i = 0; i < dim_; ++i)
            for (int e = 0; e < m[i]; ++e) v *= x[i];
        s += v;
    }
    return s;
}

ScalarPoly ScalarPoly::operator+(const ScalarPoly& o) const {
    ScalarPoly r = *this;
    if (r.dim_ == 0) r.dim_ = o.dim_;
    for (const auto& [m, c] : o.terms_) r.add_term(m, c);
    return r;
}

ScalarPoly ScalarPoly::operator-(const ScalarPoly& o) const { return *this + o * -1.0; }

ScalarPoly ScalarPoly::operator*(const ScalarPoly& o) const {
    ScalarPoly r(std::max(dim_, o.dim_));
    for (const auto& [ma, ca] : terms_) {
        for (const auto& [mb, cb] : o.terms_) {
            Monomial m(ma.size());
            for (std::size_t i = 0; i < m.size(); ++i) m[i] = ma[i] + mb[i];
            r.add_term(m, ca * cb);
        }
    }
    return r;
}

ScalarPoly ScalarPoly::operator*(double c) const {
    ScalarPoly r(dim_);
    for (const auto& [m, v] : terms_) r.add_term(m, v * c);
    return r;
}

ScalarPoly ScalarPoly::pow(int n) const {
    ScalarPoly r = constant(dim_, 1.0);
    for (int k = 0; k < n; ++k) r = r * *this;
    return r;
}

ScalarPoly ScalarPoly::derivative(int i) const {
    ScalarPoly r(dim_);
    for (const auto& [m, c] : terms_) {
        if (m[i] == 0) continue;
        Monomial mm = m;
        --mm[i];
        r.add_term(mm, c * m[i]);
    }
    return r;
}

std::string ScalarPoly::str() const {
    if (terms_.empty()) return "0";
    std::string s;
    bool first = true;
    // Highest total degree first, then by exponent vector, for stable text.
    std::vector<std::pair<Monomial, double>> ordered(terms_.rbegin(), terms_.rend());
    for (const auto& [m, c] : ordered) {
        double mag = std::fabs(c);
        if (first) {
            if (c < 0) s += "-";
        } else {
            s += c < 0 ? " - " : " + ";
        }
        first = false;
        std::string mono;
        for (int i = 0; i < dim_; ++i) {
            if (m[i] == 0) continue;
            if (!mono.empty()) mono += "*";
            mono += "x_" + std::to_string(i + 1);
            if (m[i] > 1) mono += "^" + std::to_string(m[i]);
        }
        if (mono.empty()) {
            s += fmt_double(mag);
        } else if (mag == 1.0) {
            s += mono;
        } else {
            s += fmt_double(mag) + "*" + mono;
        }
    }
    return s;
}

// ------------------------------------------------------------------- factors

Rational factor_degree(const ScalarFactor& f) {
    if (auto* n = std::get_if<NormPower>(&f)) return n->nu;
    if (auto* c = std::get_if<CoordPower>(&f)) return c->gamma;
    const auto& p = std::get<PolyNormPower>(f);
    return Rational(p.m) * p.nu;
}

double eval_factor(const ScalarFactor& f, const Vec& x) {
    if (auto* n = std::get_if<NormPower>(&f)) return lp_power(apply_matrix(n->matrix, x), n->p, n->nu);
    if (auto* c = std::get_if<CoordPower>(&f)) {
        const double v = x[c->index];
        if (c->gamma.is_zero()) return 1.0;
        const double mag = std::pow(std::fabs(v), c->gamma.to_double());
        if (c->type == SignType::Abs) return mag;
        return v > 0 ? mag : (v < 0 ? -mag : 0.0);
    }
    const auto& p = std::get<PolyNormPower>(f);
    Vec y(static_cast<Eigen::Index>(p.polys.size()));
    for (std::size_t l = 0; l < p.polys.size(); ++l) y[static_cast<Eigen::Index>(l)] = p.polys[l].eval(x);
    return lp_power(y, p.p, p.nu);
}

std::string factor_str(const ScalarFactor& f) {
    auto norm_name = [](const std::string& base, const Rational& p) {
        return p.is_integer() ? base + p.str() : base + "_{" + p.str() + "}";
    };
    if (auto* n = std::get_if<NormPower>(&f)) {
        std::string arg = n->matrix.size() == 0 ? "x" : fmt_matrix(n->matrix) + "*x";
        return norm_name("norm", n->p) + "(" + arg + ")^{" + n->nu.str() + "}";
    }
    if (auto* c = std::get_if<CoordPower>(&f)) {
        std::string var = "x_" + std::to_string(c->index + 1);
        if (c->type == SignType::Abs) return "abs(" + var + ")^{" + c->gamma.str() + "}";
        return "sgnpow(" + var + ", " + c->gamma.str() + ")";
    }
    const auto& p = std::get<PolyNormPower>(f);
    std::string s = norm_name("polynorm", p.p) + "(";
    for (std::size_t l = 0; l < p.polys.size(); ++l) {
        if (l) s += ", ";
        s += p.polys[l].str();
    }
    return s + ")^{" + p.nu.str() + "}";
}

bool factor_equal(const ScalarFactor& a, const ScalarFactor& b) {
    if (!same_base(a, b)) return false;
    if (auto* ca = std::get_if<CoordPower>(&a)) {
        const auto& cb = std::get<CoordPower>(b);
        return ca->type == cb.type && ca->gamma == cb.gamma;
    }
    return factor_degree(a) == factor_degree(b);
}

bool factor_less(const ScalarFactor& a, const ScalarFactor& b) {
    if (a.index() != b.index()) return a.index() < b.index();
    if (auto* na = std::get_if<NormPower>(&a)) {
        const auto& nb = std::get<NormPower>(b);
        if (na->p != nb.p) return na->p < nb.p;
        if (!matrix_equal(na->matrix, nb.matrix)) return matrix_less(na->matrix, nb.matrix);
        return na->nu < nb.nu;
    }
    if (auto* ca = std::get_if<CoordPower>(&a)) {
        const auto& cb = std::get<CoordPower>(b);
        if (ca->index != cb.index) return ca->index < cb.index;
        if (ca->type != cb.type) return ca->type < cb.type;
        return ca->gamma < cb.gamma;
    }
    const auto& pa = std::get<PolyNormPower>(a);
    const auto& pb = std::get<PolyNormPower>(b);
    if (pa.p != pb.p) return pa.p < pb.p;
    if (!(pa.polys == pb.polys)) return polys_less(pa.polys, pb.polys);
    return pa.nu < pb.nu;
}

std::vector<ScalarFactor> canonicalize(std::vector<ScalarFactor> factors, ScalarPoly& poly_out) {
    std::vector<ScalarFactor> merged;
    for (auto& f : factors) {
        if (factor_degree(f).is_zero()) continue;
        auto it = std::find_if(merged.begin(), merged.end(), [&](const ScalarFactor& g) { return same_base(f, g); });
        if (it == merged.end()) {
            merged.push_back(std::move(f));
            continue;
        }
        if (auto* n = std::get_if<NormPower>(&*it)) {
            n->nu += std::get<NormPower>(f).nu;
        } else if (auto* c = std::get_if<CoordPower>(&*it)) {
            const auto& o = std::get<CoordPower>(f);
            c->gamma += o.gamma;
            c->type = (c->type == o.type) ? SignType::Abs : SignType::Signed;
        } else {
            std::get<PolyNormPower>(*it).nu += std::get<PolyNormPower>(f).nu;
        }
    }

    const int dim = poly_out.dim();
    std::vector<ScalarFactor> out;
    for (auto& f : merged) {
        if (factor_degree(f).is_zero()) continue;
        if (auto* c = std::get_if<CoordPower>(&f)) {
            const bool poly = c->gamma.is_integer() &&
                              ((c->type == SignType::Abs && c->gamma.num() % 2 == 0) ||
                               (c->type == SignType::Signed && c->gamma.num() % 2 != 0));
            if (poly) {
                poly_out = poly_out * ScalarPoly::variable(dim, c->index).pow(static_cast<int>(c->gamma.num()));
                continue;
            }
        } else if (auto* n = std::get_if<NormPower>(&f)) {
            if (is_even_integer(n->p) && (n->nu / n->p).is_integer() && n->nu.sign() > 0) {
                const int rows = n->matrix.size() == 0 ? dim : static_cast<int>(n->matrix.rows());
                ScalarPoly s(dim);
                for (int r = 0; r < rows; ++r)
                    s = s + linear_row(n->matrix, r, dim).pow(static_cast<int>(n->p.num()));
                poly_out = poly_out * s.pow(static_cast<int>((n->nu / n->p).num()));
                continue;
            }
        } else {
            auto& p = std::get<PolyNormPower>(f);
            if (is_even_integer(p.p) && (p.nu / p.p).is_integer() && p.nu.sign() > 0) {
                ScalarPoly s(dim);
                for (const auto& q : p.polys) s = s + q.pow(static_cast<int>(p.p.num()));
                poly_out = poly_out * s.pow(static_cast<int>((p.nu / p.p).num()));
                continue;
            }
        }
        out.push_back(std::move(f));
    }
    std::sort(out.begin(), out.end(), factor_less);
    return out;
}

// --------------------------------------------------------------------- terms

double eval_scalar_term(const ScalarTerm& t, const Vec& x) {
    double v = t.poly.eval(x);
    if (v == 0) return 0;
    for (const auto& f : t.factors) v *= eval_factor(f, x);
    return v;
}

Rational HomogeneousTerm::factor_degree_sum() const {
    Rational s(0);
    for (const auto& f : factors) s += factor_degree(f);
    return s;
}

int HomogeneousTerm::tail_degree() const {
    int deg = -1;
    for (const auto& p : tail) deg = std::max(deg, p.degree());
    return deg;
}

Rational HomogeneousTerm::degree() const { return factor_degree_sum() + Rational(std::max(tail_degree(), 0)); }

Vec HomogeneousTerm::eval(const Vec& x) const {
    Vec out = Vec::Zero(dim());
    double scale = 1.0;
    for (const auto& f : factors) scale *= eval_factor(f, x);
    if (scale == 0) return out;
    for (int i = 0; i < dim(); ++i) out[i] = scale * tail[i].eval(x);
    return out;
}

std::string HomogeneousTerm::str() const {
    std::string s;
    for (const auto& f : factors) s += factor_str(f) + " * ";
    s += "[";
    for (int i = 0; i < dim(); ++i) {
        if (i) s += ", ";
        s += tail[i].str();
    }
    return s + "]";
}

Vec HomogeneousComponent::eval(const Vec& x) const {
    Vec out = Vec::Zero(x.size());
    for (const auto& t : terms) out += t.eval(x);
    return out;
}

std::string HomogeneousComponent::str() const {
    std::string s;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (i) s += " + ";
        s += terms[i].str();
    }
    return s.empty() ? "0" : s;
}

std::vector<HomogeneousComponent> merge_by_degree(const std::vector<HomogeneousTerm>& terms) {
    std::map<Rational, std::vector<HomogeneousTerm>> groups;
    for (const auto& t : terms) {
        if (t.tail_degree() < 0) continue;
        auto& g = groups[t.degree()];
        auto it = std::find_if(g.begin(), g.end(), [&](const HomogeneousTerm& o) {
            return o.factors.size() == t.factors.size() &&
                   std::equal(o.factors.begin(), o.factors.end(), t.factors.begin(), factor_equal);
        });
        if (it == g.end()) {
            g.push_back(t);
        } else {
            for (int i = 0; i < t.dim(); ++i) it->tail[i] = it->tail[i] + t.tail[i];
        }
    }
    std::vector<HomogeneousComponent> out;
    for (auto& [deg, g] : groups) {
        HomogeneousComponent c;
        c.degree = deg;
        for (auto& t : g)
            if (t.tail_degree() >= 0) c.terms.push_back(std::move(t));
        if (!c.terms.empty()) out.push_back(std::move(c));
    }
    return out;
}

namespace {

ScalarTerm multiply(const ScalarTerm& a, const ScalarTerm& b) {
    ScalarTerm r;
    r.poly = a.poly * b.poly;
    std::vector<ScalarFactor> f = a.factors;
    f.insert(f.end(), b.factors.begin(), b.factors.end());
    r.factors = canonicalize(std::move(f), r.poly);
    return r;
}

HomogeneousTerm multiply(const HomogeneousTerm& a, const ScalarTerm& b) {
    const int dim = a.dim();
    ScalarPoly extra = ScalarPoly::constant(dim, 1.0);
    std::vector<ScalarFactor> f = a.factors;
    f.insert(f.end(), b.factors.begin(), b.factors.end());
    HomogeneousTerm r;
    r.factors = canonicalize(std::move(f), extra);
    ScalarPoly mult = extra * b.poly;
    for (const auto& p : a.tail) r.tail.push_back(p * mult);
    return r;
}

Rational min_degree(const std::vector<HomogeneousTerm>& terms) {
    Rational best(0);
    bool any = false;
    for (const auto& t : terms) {
        if (t.tail_degree() < 0) continue;
        if (!any || t.degree() < best) best = t.degree();
        any = true;
    }
    return best;
}

// Terms of numerator * (-D)^j for j in [0, jmax].
std::vector<HomogeneousTerm> composite_terms(const Composite& c, int jmax) {
    std::vector<HomogeneousTerm> out;
    if (c.numerator.empty()) return out;
    const int dim = c.numerator.front().dim();
    std::vector<ScalarTerm> power{ScalarTerm{{}, ScalarPoly::constant(dim, 1.0)}};
    for (int j = 0; j <= jmax; ++j) {
        for (const auto& nt : c.numerator)
            for (const auto& pt : power) out.push_back(multiply(nt, pt));
        if (j == jmax) break;
        std::vector<ScalarTerm> next;
        for (const auto& pt : power) {
            for (const auto& dt : c.denominator) {
                ScalarTerm neg = dt;
                neg.poly = neg.poly * -1.0;
                ScalarTerm prod = multiply(pt, neg);
                auto it = std::find_if(next.begin(), next.end(), [&](const ScalarTerm& o) {
                    return o.factors.size() == prod.factors.size() &&
                           std::equal(o.factors.begin(), o.factors.end(), prod.factors.begin(), factor_equal);
                });
                if (it == next.end())
                    next.push_back(std::move(prod));
                else
                    it->poly = it->poly + prod.poly;
            }
        }
        power = std::move(next);
    }
    return out;
}

}  // namespace

std::vector<HomogeneousComponent> expand_composite(const Composite& c, int depth) {
    if (depth < 1) throw Error(ErrorKind::InvalidInput, "composite depth must be at least 1");
    if (c.denominator_degree.sign() <= 0)
        throw Error(ErrorKind::DegreeError, "composite denominator must have positive degree");
    return merge_by_degree(composite_terms(c, depth - 1));
}

// ---------------------------------------------------------------------- spec

std::string mode_name(SpecMode mode) {
    switch (mode) {
        case SpecMode::Infinite: return "h1";
        case SpecMode::Finite: return "h2";
        case SpecMode::FiniteWithRemainder: return "finite_with_remainder";
    }
    return "h1";
}

SpecMode parse_mode(const std::string& name) {
    if (name == "h1" || name == "infinite") return SpecMode::Infinite;
    if (name == "h2" || name == "finite") return SpecMode::Finite;
    if (name == "finite_with_remainder" || name == "errF3") return SpecMode::FiniteWithRemainder;
    throw Error(ErrorKind::InvalidInput, "unknown nonlinearity mode '" + name + "'");
}

bool NonlinearitySpec::is_rule_generated() const {
    return mode == SpecMode::Infinite && !composites.empty();
}

std::vector<HomogeneousComponent> NonlinearitySpec::components_up_to(const Rational& bound) const {
    std::vector<HomogeneousTerm> all;
    for (const auto& t : terms)
        if (t.tail_degree() >= 0 && t.degree() <= bound) all.push_back(t);
    for (const auto& c : composites) {
        const Rational lo = min_degree(c.numerator);
        int jmax = 0;
        if (lo <= bound) jmax = static_cast<int>(((bound - lo) / c.denominator_degree).floor());
        else continue;
        if (!is_rule_generated() && c.depth > 0) jmax = std::min(jmax, c.depth - 1);
        for (auto& t : composite_terms(c, jmax))
            if (t.degree() <= bound) all.push_back(std::move(t));
    }
    return merge_by_degree(all);
}

std::vector<HomogeneousComponent> NonlinearitySpec::components() const {
    if (is_rule_generated())
        throw Error(ErrorKind::InvalidInput, "rule-generated nonlinearity has infinitely many components");
    std::vector<HomogeneousTerm> all = terms;
    for (const auto& c : composites) {
        auto ct = composite_terms(c, std::max(c.depth, 1) - 1);
        all.insert(all.end(), ct.begin(), ct.end());
    }
    return merge_by_degree(all);
}

std::vector<HomogeneousComponent> NonlinearitySpec::first_components(int count) const {
    if (!is_rule_generated()) {
        auto all = components();
        if (static_cast<int>(all.size()) > count) all.resize(static_cast<std::size_t>(count));
        return all;
    }
    Rational lo(0), step(0);
    bool any = false;
    for (const auto& c : composites) {
        Rational m = min_degree(c.numerator);
        if (!any || m < lo) lo = m;
        if (!any || c.denominator_degree < step) step = c.denominator_degree;
        any = true;
    }
    for (const auto& t : terms)
        if (t.tail_degree() >= 0 && t.degree() < lo) lo = t.degree();
    Rational bound = lo;
    for (;;) {
        auto comps = components_up_to(bound);
        if (static_cast<int>(comps.size()) >= count) {
            comps.resize(static_cast<std::size_t>(count));
            return comps;
        }
        bound += step;
    }
}

int NonlinearitySpec::component_count() const {
    if (is_rule_generated()) return -1;
    return static_cast<int>(components().size());
}

Vec NonlinearitySpec::evaluate(const Vec& x, int truncation) const {
    if (truncation < 1) throw Error(ErrorKind::InvalidInput, "truncation must be at least 1");
    if (!is_rule_generated() && truncation > component_count() && mode != SpecMode::Infinite)
        throw Error(ErrorKind::FiniteModeExceeded,
                    "truncation " + std::to_string(truncation) + " exceeds N* = " + std::to_string(component_count()));
    Vec out = Vec::Zero(dim);
    for (const auto& c : first_components(truncation)) out += c.eval(x);
    return out;
}

Vec NonlinearitySpec::evaluate_full(const Vec& x) const {
    const double n = x.norm();
    if (n == 0) return Vec::Zero(dim);
    return ScaledEvaluator(*this)(std::log(n), x / n) * n;
}

Vec NonlinearitySpec::evaluate_scaled(double log_scale, const Vec& z) const {
    return ScaledEvaluator(*this)(log_scale, z);
}

void NonlinearitySpec::validate() const {
    auto check_term = [&](const HomogeneousTerm& t, const char* where) {
        if (t.dim() != dim)
            throw Error(ErrorKind::InvalidInput, std::string(where) + " term has wrong output dimension");
        int deg = -2;
        for (const auto& p : t.tail) {
            if (!p.is_homogeneous())
                throw Error(ErrorKind::DegreeError, std::string(where) + " term '" + t.str() + "' is not homogeneous");
            if (p.is_zero()) continue;
            if (deg != -2 && p.degree() != deg)
                throw Error(ErrorKind::DegreeError, std::string(where) + " term '" + t.str() + "' mixes degrees");
            deg = p.degree();
        }
    };
    for (const auto& t : terms) check_term(t, "nonlinearity");
    for (const auto& c : composites) {
        if (c.numerator.empty()) throw Error(ErrorKind::InvalidInput, "composite with empty numerator");
        for (const auto& t : c.numerator) check_term(t, "composite numerator");
        if (c.denominator_degree.sign() <= 0)
            throw Error(ErrorKind::DegreeError, "composite denominator must have positive degree");
        for (const auto& d : c.denominator) {
            if (!d.poly.is_homogeneous())
                throw Error(ErrorKind::DegreeError, "composite denominator is not homogeneous");
            Rational deg = Rational(std::max(d.poly.degree(), 0));
            for (const auto& f : d.factors) deg += factor_degree(f);
            if (deg != c.denominator_degree)
                throw Error(ErrorKind::DegreeError, "composite denominator terms differ in degree");
        }
        if (mode != SpecMode::Infinite && c.depth < 1)
            throw Error(ErrorKind::InvalidInput, "composite needs an explicit depth in finite modes");
    }
    if (mode == SpecMode::FiniteWithRemainder && remainder_exponent.sign() <= 0)
        throw Error(ErrorKind::InvalidInput, "remainder exponent must be positive");

    Rational lowest(0);
    bool any = false;
    for (const auto& t : terms) {
        if (t.tail_degree() < 0) continue;
        if (!any || t.degree() < lowest) lowest = t.degree();
        any = true;
    }
    for (const auto& c : composites) {
        Rational m = min_degree(c.numerator);
        if (!any || m < lowest) lowest = m;
        any = true;
    }
    if (any && lowest <= Rational(1))
        throw Error(ErrorKind::DegreeError, "homogeneous degree " + lowest.str() + " must exceed 1");
}

// ---------------------------------------------------------------- smoothness

SmoothnessReport smoothness_domain_check(const NonlinearitySpec& spec, const Vec& xi, double zero_tol) {
    SmoothnessReport rep;
    const double scale = xi.lpNorm<Eigen::Infinity>();
    std::vector<ScalarFactor> seen;
    auto visit = [&](const ScalarFactor& f) {
        for (const auto& s : seen)
            if (factor_equal(s, f)) return;
        seen.push_back(f);
        FactorVerdict v;
        v.factor = factor_str(f);
        if (auto* n = std::get_if<NormPower>(&f)) {
            Vec y = apply_matrix(n->matrix, xi);
            const double tol = zero_tol * scale * std::max(1.0, n->matrix.size() ? n->matrix.norm() : 1.0);
            if (is_even_integer(n->p)) {
                if (y.norm() <= tol) {
                    v.smooth = false;
                    v.reason = "norm argument vanishes at xi";
                }
            } else {
                for (Eigen::Index l = 0; l < y.size(); ++l) {
                    if (std::fabs(y[l]) <= tol) {
                        v.smooth = false;
                        v.reason = "entry " + std::to_string(l + 1) + " of the norm argument vanishes at xi (p not even)";
                        break;
                    }
                }
            }
        } else if (auto* c = std::get_if<CoordPower>(&f)) {
            if (std::fabs(xi[c->index]) <= zero_tol * scale) {
                v.smooth = false;
                v.reason = "x_" + std::to_string(c->index + 1) + " = 0 at xi";
            }
        } else {
            const auto& p = std::get<PolyNormPower>(f);
            Vec y(static_cast<Eigen::Index>(p.polys.size()));
            for (std::size_t l = 0; l < p.polys.size(); ++l) y[static_cast<Eigen::Index>(l)] = p.polys[l].eval(xi);
            const double tol = zero_tol * std::pow(std::max(scale, 1e-300), p.m);
            if (is_even_integer(p.p)) {
                if (y.norm() <= tol) {
                    v.smooth = false;
                    v.reason = "P(xi) = 0";
                }
            } else {
                for (Eigen::Index l = 0; l < y.size(); ++l) {
                    if (std::fabs(y[l]) <= tol) {
                        v.smooth = false;
                        v.reason = "P_" + std::to_string(l + 1) + "(xi) = 0 (p not even)";
                        break;
                    }
                }
            }
        }
        if (!v.smooth) rep.offending.push_back(v.factor);
        rep.verdicts.push_back(std::move(v));
    };
    for (const auto& t : spec.terms)
        for (const auto& f : t.factors) visit(f);
    for (const auto& c : spec.composites) {
        for (const auto& t : c.numerator)
            for (const auto& f : t.factors) visit(f);
        for (const auto& t : c.denominator)
            for (const auto& f : t.factors) visit(f);
    }
    rep.applicable = rep.offending.empty();
    if (rep.applicable) {
        rep.message = "every factor is smooth near xi";
    } else {
        rep.message = "not smooth near xi: ";
        for (std::size_t i = 0; i < rep.offending.size(); ++i) {
            if (i) rep.message += ", ";
            rep.message += rep.offending[i];
        }
    }
    return rep;
}

bool poly_vanishes_only_at_origin(const std::vector<ScalarPoly>& polys, int starts) {
    if (polys.empty()) return false;
    const int d = polys.front().dim();
    std::vector<std::vector<ScalarPoly>> grads(polys.size());
    for (std::size_t l = 0; l < polys.size(); ++l)
        for (int i = 0; i < d; ++i) grads[l].push_back(polys[l].derivative(i));
    auto value = [&](const Vec& x) {
        double s = 0;
        for (const auto& p : polys) {
            double v = p.eval(x);
            s += v * v;
        }
        return s;
    };
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> normal(0.0, 1.0);
    double global_max = 0, global_min = HUGE_VAL;
    Vec x(d), g(d);
    for (int s = 0; s < starts; ++s) {
        for (int i = 0; i < d; ++i) x[i] = normal(rng);
        x.normalize();
        global_max = std::max(global_max, value(x));
        double step = 0.1;
        double fx = value(x);
        for (int it = 0; it < 300 && step > 1e-14; ++it) {
            g.setZero();
            for (std::size_t l = 0; l < polys.size(); ++l) {
                const double v = polys[l].eval(x);
                for (int i = 0; i < d; ++i) g[i] += 2 * v * grads[l][i].eval(x);
            }
            g -= g.dot(x) * x;
            if (g.norm() == 0) break;
            Vec trial = (x - step * g / g.norm()).normalized();
            const double ft = value(trial);
            if (ft < fx) {
                x = trial;
                fx = ft;
                step *= 1.2;
            } else {
                step *= 0.5;
            }
        }
        global_min = std::min(global_min, fx);
    }
    return global_min > 1e-10 * std::max(global_max, 1e-300);
}

Classification classify(const NonlinearitySpec& spec) {
    Classification cl;
    cl.lipschitz = true;
    std::set<std::string> noted;
    auto note = [&](const std::string& s) {
        if (noted.insert(s).second) cl.notes.push_back(s);
    };
    auto visit = [&](const ScalarFactor& f) {
        if (auto* n = std::get_if<NormPower>(&f)) {
            if (n->nu >= Rational(1)) return;
            const int rank = n->matrix.size() == 0
                                 ? spec.dim
                                 : static_cast<int>(Eigen::FullPivLU<Mat>(n->matrix).rank());
            if (rank == spec.dim) return;
            cl.lipschitz = false;
            note(factor_str(f) + ": exponent below 1 and the norm argument has a nontrivial kernel");
        } else if (auto* c = std::get_if<CoordPower>(&f)) {
            if (c->gamma >= Rational(1)) return;
            cl.lipschitz = false;
            note(factor_str(f) + ": coordinate power below 1");
        } else {
            const auto& p = std::get<PolyNormPower>(f);
            if (p.nu >= Rational(1)) return;
            if (poly_vanishes_only_at_origin(p.polys)) return;
            cl.lipschitz = false;
            note(factor_str(f) + ": P vanishes off the origin");
        }
    };
    for (const auto& t : spec.terms)
        for (const auto& f : t.factors) visit(f);
    for (const auto& c : spec.composites) {
        for (const auto& t : c.numerator)
            for (const auto& f : t.factors) visit(f);
        for (const auto& t : c.denominator)
            for (const auto& f : t.factors) visit(f);
    }
    cl.regularity = cl.lipschitz ? "locally-lipschitz" : "continuous-only";
    if (cl.lipschitz)
        note("every factor is locally Lipschitz or smooth off the origin; homogeneous degrees exceed 1");
    return cl;
}

// ------------------------------------------------------------ scaled evaluator

ScaledEvaluator::ScaledEvaluator(const NonlinearitySpec& spec) : dim_(spec.dim) {
    std::vector<HomogeneousComponent> comps;
    if (spec.mode == SpecMode::Infinite) {
        comps = merge_by_degree(spec.terms);
        for (const auto& c : spec.composites) {
            ClosedComposite cc;
            for (const auto& t : c.numerator)
                if (t.tail_degree() >= 0) cc.numerator.push_back({t.degree().to_double(), t});
            cc.denominator = c.denominator;
            cc.denominator_degree = c.denominator_degree.to_double();
            composites_.push_back(std::move(cc));
        }
    } else {
        comps = spec.components();
    }
    for (const auto& c : comps)
        for (const auto& t : c.terms) pieces_.push_back({c.degree.to_double(), t});
}

Vec ScaledEvaluator::operator()(double log_scale, const Vec& z) const {
    Vec out = Vec::Zero(dim_);
    for (const auto& p : pieces_) {
        const double w = std::exp((p.degree - 1.0) * log_scale);
        if (w == 0) continue;
        out += w * p.term.eval(z);
    }
    for (const auto& c : composites_) {
        Vec num = Vec::Zero(dim_);
        for (const auto& p : c.numerator) {
            const double w = std::exp((p.degree - 1.0) * log_scale);
            if (w != 0) num += w * p.term.eval(z);
        }
        double den = 0;
        for (const auto& t : c.denominator) den += eval_scalar_term(t, z);
        out += num / (1.0 + std::exp(c.denominator_degree * log_scale) * den);
    }
    return out;
}

}  // namespace asympode
