#include "asympode/jet.hpp"

#include "asympode/error.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <functional>

namespace asympode {

namespace {

using boost::multiprecision::cpp_rational;

cpp_rational to_big(const Rational& r) { return cpp_rational(r.num(), r.den()); }

void check_space(const Jet& a, const Jet& b) {
    if (a.space != b.space) throw Error(ErrorKind::InvalidInput, "jets from different spaces");
}

}  // namespace

JetSpace::JetSpace(int dim, int order) : dim_(dim), order_(order) {
    if (dim < 1 || order < 0) throw Error(ErrorKind::InvalidInput, "invalid jet space");
    for (int deg = 0; deg <= order; ++deg) {
        degree_start_.push_back(static_cast<int>(monomials_.size()));
        // Lexicographically descending exponent vectors of total degree deg.
        Monomial m(static_cast<std::size_t>(dim), 0);
        std::function<void(int, int)> rec = [&](int pos, int left) {
            if (pos == dim - 1) {
                m[static_cast<std::size_t>(pos)] = left;
                lookup_.emplace(m, static_cast<int>(monomials_.size()));
                monomials_.push_back(m);
                degrees_.push_back(deg);
                return;
            }
            for (int e = left; e >= 0; --e) {
                m[static_cast<std::size_t>(pos)] = e;
                rec(pos + 1, left - e);
            }
        };
        rec(0, deg);
    }
    degree_start_.push_back(static_cast<int>(monomials_.size()));

    products_.resize(monomials_.size());
    Monomial sum(static_cast<std::size_t>(dim));
    for (int i = 0; i < size(); ++i) {
        for (int j = 0; j < size(); ++j) {
            if (degrees_[static_cast<std::size_t>(i)] + degrees_[static_cast<std::size_t>(j)] > order) continue;
            for (int v = 0; v < dim; ++v)
                sum[static_cast<std::size_t>(v)] =
                    monomials_[static_cast<std::size_t>(i)][static_cast<std::size_t>(v)] +
                    monomials_[static_cast<std::size_t>(j)][static_cast<std::size_t>(v)];
            products_[static_cast<std::size_t>(lookup_.at(sum))].emplace_back(i, j);
        }
    }
}

int JetSpace::index(const Monomial& m) const {
    auto it = lookup_.find(m);
    return it == lookup_.end() ? -1 : it->second;
}

std::pair<int, int> JetSpace::degree_range(int k) const {
    if (k < 0 || k > order_) return {0, 0};
    return {degree_start_[static_cast<std::size_t>(k)], degree_start_[static_cast<std::size_t>(k) + 1]};
}

Jet jet_constant(const std::shared_ptr<const JetSpace>& space, double v) {
    Jet j{space, std::vector<double>(static_cast<std::size_t>(space->size()), 0.0)};
    j.c[0] = v;
    return j;
}

Jet jet_variable(const std::shared_ptr<const JetSpace>& space, int i, double base) {
    Jet j = jet_constant(space, base);
    if (space->order() >= 1) {
        Monomial m(static_cast<std::size_t>(space->dim()), 0);
        m[static_cast<std::size_t>(i)] = 1;
        j.c[static_cast<std::size_t>(space->index(m))] = 1.0;
    }
    return j;
}

Jet operator+(const Jet& a, const Jet& b) {
    check_space(a, b);
    Jet r = a;
    for (std::size_t k = 0; k < r.c.size(); ++k) r.c[k] += b.c[k];
    return r;
}

Jet operator*(const Jet& a, double s) {
    Jet r = a;
    for (auto& v : r.c) v *= s;
    return r;
}

Jet operator*(const Jet& a, const Jet& b) {
    check_space(a, b);
    Jet r{a.space, std::vector<double>(a.c.size(), 0.0)};
    for (int k = 0; k < a.space->size(); ++k) {
        double s = 0;
        for (const auto& [i, j] : a.space->products_into(k))
            s += a.c[static_cast<std::size_t>(i)] * b.c[static_cast<std::size_t>(j)];
        r.c[static_cast<std::size_t>(k)] = s;
    }
    return r;
}

double binomial(const Rational& a, int k) {
    cpp_rational r(1);
    const cpp_rational big = to_big(a);
    for (int i = 0; i < k; ++i) r = r * (big - i) / (i + 1);
    return static_cast<double>(r);
}

double multinomial(const Monomial& alpha) {
    cpp_rational r(1);
    int n = 0;
    for (int e : alpha) {
        for (int i = 1; i <= e; ++i) {
            ++n;
            r = r * n / i;
        }
    }
    return static_cast<double>(r);
}

Jet jet_pow(const Jet& u, const Rational& a) {
    const double u0 = u.value();
    if (!(u0 > 0)) throw Error(ErrorKind::SingularBasePoint, "power series about a non-positive base value");
    if (a.is_zero()) return jet_constant(u.space, 1.0);
    Jet w = u;
    w.c[0] = 0.0;
    w = w * (1.0 / u0);
    // Horner-free accumulation: term_k = binom(a, k) w^k.
    Jet result = jet_constant(u.space, 1.0);
    Jet wk = jet_constant(u.space, 1.0);
    for (int k = 1; k <= u.space->order(); ++k) {
        wk = wk * w;
        const double b = binomial(a, k);
        if (b == 0) break;
        for (std::size_t i = 0; i < result.c.size(); ++i) result.c[i] += b * wk.c[i];
    }
    return result * std::pow(u0, a.to_double());
}

Jet jet_abs_pow(const Jet& u, const Rational& a) {
    if (u.value() == 0) throw Error(ErrorKind::SingularBasePoint, "absolute power about a zero base value");
    return jet_pow(u.value() > 0 ? u : u * -1.0, a);
}

Jet jet_signed_pow(const Jet& u, const Rational& a) {
    Jet r = jet_abs_pow(u, a);
    return u.value() > 0 ? r : r * -1.0;
}

Jet jet_int_pow(const Jet& u, int n) {
    Jet r = jet_constant(u.space, 1.0);
    for (int k = 0; k < n; ++k) r = r * u;
    return r;
}

namespace {

Jet poly_jet(const ScalarPoly& p, const std::vector<Jet>& vars, const std::shared_ptr<const JetSpace>& space) {
    Jet out = jet_constant(space, 0.0);
    for (const auto& [mono, coef] : p.terms()) {
        Jet t = jet_constant(space, coef);
        for (std::size_t i = 0; i < mono.size(); ++i)
            if (mono[i] > 0) t = t * jet_int_pow(vars[i], mono[i]);
        out = out + t;
    }
    return out;
}

bool even_integer(const Rational& r) { return r.is_integer() && r.num() % 2 == 0; }

// ||y||_p^nu for jets y_l.
Jet norm_jet(const std::vector<Jet>& y, const Rational& p, const Rational& nu,
             const std::shared_ptr<const JetSpace>& space, const std::string& name) {
    Jet s = jet_constant(space, 0.0);
    if (even_integer(p)) {
        for (const auto& yl : y) s = s + jet_int_pow(yl, static_cast<int>(p.num()));
    } else {
        for (const auto& yl : y) {
            if (yl.value() == 0)
                throw Error(ErrorKind::SingularBasePoint, name + " is not smooth at the base point");
            s = s + jet_abs_pow(yl, p);
        }
    }
    if (!(s.value() > 0)) throw Error(ErrorKind::SingularBasePoint, name + " vanishes at the base point");
    return jet_pow(s, nu / p);
}

}  // namespace

std::vector<Jet> component_jets(const HomogeneousComponent& comp, const Vec& xi,
                                const std::shared_ptr<const JetSpace>& space) {
    const int d = space->dim();
    std::vector<Jet> vars;
    for (int i = 0; i < d; ++i) vars.push_back(jet_variable(space, i, xi[i]));
    std::vector<Jet> out(static_cast<std::size_t>(d), jet_constant(space, 0.0));
    for (const auto& term : comp.terms) {
        Jet scale = jet_constant(space, 1.0);
        for (const auto& f : term.factors) {
            const std::string name = factor_str(f);
            if (auto* n = std::get_if<NormPower>(&f)) {
                std::vector<Jet> y;
                if (n->matrix.size() == 0) {
                    y = vars;
                } else {
                    for (Eigen::Index r = 0; r < n->matrix.rows(); ++r) {
                        Jet yr = jet_constant(space, 0.0);
                        for (int j = 0; j < d; ++j)
                            if (n->matrix(r, j) != 0) yr = yr + vars[static_cast<std::size_t>(j)] * n->matrix(r, j);
                        y.push_back(std::move(yr));
                    }
                }
                scale = scale * norm_jet(y, n->p, n->nu, space, name);
            } else if (auto* c = std::get_if<CoordPower>(&f)) {
                const Jet& v = vars[static_cast<std::size_t>(c->index)];
                if (v.value() == 0)
                    throw Error(ErrorKind::SingularBasePoint, name + " is not smooth at the base point");
                scale = scale * (c->type == SignType::Abs ? jet_abs_pow(v, c->gamma) : jet_signed_pow(v, c->gamma));
            } else {
                const auto& pn = std::get<PolyNormPower>(f);
                std::vector<Jet> y;
                for (const auto& q : pn.polys) y.push_back(poly_jet(q, vars, space));
                scale = scale * norm_jet(y, pn.p, pn.nu, space, name);
            }
        }
        for (int i = 0; i < d; ++i) {
            const auto& tp = term.tail[static_cast<std::size_t>(i)];
            if (tp.is_zero()) continue;
            out[static_cast<std::size_t>(i)] = out[static_cast<std::size_t>(i)] + scale * poly_jet(tp, vars, space);
        }
    }
    return out;
}

}  // namespace asympode
