#include "asympode/expansion.hpp"

#include "asympode/error.hpp"
#include "asympode/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace asympode {

std::string policy_name(ResonancePolicy p) { return p == ResonancePolicy::Zero ? "zero" : "fit"; }

ResonancePolicy parse_policy(const std::string& name) {
    if (name == "zero") return ResonancePolicy::Zero;
    if (name == "fit") return ResonancePolicy::Fit;
    throw Error(ErrorKind::InvalidInput, "unknown resonance policy '" + name + "' (expected zero or fit)");
}

VectorPolynomial solve_polynomial_ode(const SpectralData& sd, const Rational& mu, const VectorPolynomial& p,
                                      const std::vector<Vec>& resonant_constants) {
    const int d = sd.dimension;
    VectorPolynomial q(d);
    for (int j = 0; j < sd.distinct_count(); ++j) {
        const Mat& r = sd.projections[static_cast<std::size_t>(j)];
        const VectorPolynomial pj = p.left(r);
        if (sd.distinct[static_cast<std::size_t>(j)] == mu) {
            VectorPolynomial qj = pj.antiderivative();
            const auto js = static_cast<std::size_t>(j);
            if (js < resonant_constants.size() && resonant_constants[js].size() == d)
                qj += VectorPolynomial::constant(r * resonant_constants[js]);
            q += qj;
            continue;
        }
        const int deg = pj.degree();
        if (deg < 0) continue;
        const double delta = (sd.distinct[static_cast<std::size_t>(j)] - mu).to_double();
        Mat c(d, deg + 1);
        c.col(deg) = pj.coeff(deg) / delta;
        for (int k = deg - 1; k >= 0; --k) c.col(k) = (pj.coeff(k) - static_cast<double>(k + 1) * c.col(k + 1)) / delta;
        q += VectorPolynomial(std::move(c));
    }
    return q;
}

// ------------------------------------------------------------------- engine

ExpansionEngine::ExpansionEngine(const SpectralData& sd, const NonlinearitySpec& spec, const Rational& lambda_star,
                                 const Vec& xi, int lattice_size, int tensor_cap)
    : sd_(sd), spec_(spec), lambda_star_(lambda_star), xi_(xi), tensor_cap_(tensor_cap) {
    DegreeSource source = [this](int j) { return alpha(j); };
    lattice_ = build_lattice(sd, lambda_star, source, lattice_size, spec.is_rule_generated());
}

std::optional<Rational> ExpansionEngine::alpha(int r) {
    if (r < 0) return std::nullopt;
    if (static_cast<int>(components_.size()) <= r && !components_exhausted_) {
        if (spec_.is_rule_generated()) {
            components_ = spec_.first_components(std::max(2 * (r + 1), 8));
        } else {
            components_ = spec_.components();
            components_exhausted_ = true;
        }
    }
    if (r >= static_cast<int>(components_.size())) return std::nullopt;
    return components_[static_cast<std::size_t>(r)].degree - Rational(1);
}

const HomogeneousComponent& ExpansionEngine::component(int r) {
    if (!alpha(r)) throw Error(ErrorKind::IndexOutOfRange, "component " + std::to_string(r + 1) + " does not exist");
    return components_[static_cast<std::size_t>(r)];
}

const DerivativeTensor& ExpansionEngine::tensor(int r, int order) {
    auto& cache = tensors_[r];
    if (static_cast<int>(cache.size()) <= order) {
        const int target = std::min(std::max(order, 4), std::max(order, tensor_cap_));
        cache = taylor_tensors(component(r), xi_, target, tensor_cap_);
    }
    return cache[static_cast<std::size_t>(order)];
}

std::vector<JnContribution> ExpansionEngine::jn_contributions(int n) {
    std::vector<JnContribution> out;
    if (n < 1 || n > lattice_.size())
        throw Error(ErrorKind::IndexOutOfRange, "lattice index " + std::to_string(n) + " outside the window");
    if (n == 1) return out;
    const Rational target = lattice_.elements[static_cast<std::size_t>(n - 1)].tilde;
    int exact_matches = 0;
    for (int r = 0;; ++r) {
        const auto a = alpha(r);
        if (!a) break;
        const Rational base = *a * lambda_star_;
        if (base > target) break;
        const Rational rem = target - base;
        if (rem.is_zero()) {
            ++exact_matches;
            out.push_back({r, {}, 1.0});
            continue;
        }
        std::vector<int> ks;
        std::function<void(int, const Rational&)> rec = [&](int start, const Rational& left) {
            for (int k = start; k <= n - 1; ++k) {
                const Rational& tk = lattice_.elements[static_cast<std::size_t>(k - 1)].tilde;
                if (tk > left) break;
                ks.push_back(k);
                if (tk == left) {
                    // m! / prod(multiplicity!)
                    double w = 1;
                    int run = 0;
                    for (std::size_t i = 0; i < ks.size(); ++i) {
                        run = (i > 0 && ks[i] == ks[i - 1]) ? run + 1 : 1;
                        w *= static_cast<double>(i + 1) / run;
                    }
                    out.push_back({r, ks, w});
                } else {
                    rec(k, left - tk);
                }
                ks.pop_back();
            }
        };
        rec(2, rem);
    }
    if (exact_matches > 1) throw Error(ErrorKind::InvalidInput, "two components share one degree");
    return out;
}

VectorPolynomial ExpansionEngine::build_jn(int n, const std::vector<VectorPolynomial>& qs, bool parallel) {
    const int d = sd_.dimension;
    if (n >= 2 && static_cast<int>(qs.size()) < n - 1)
        throw Error(ErrorKind::MissingPredecessor,
                    "J_" + std::to_string(n) + " needs q_1..q_" + std::to_string(n - 1) + ", have " +
                        std::to_string(qs.size()));
    const auto contribs = jn_contributions(n);
    // Tensors are cached lazily; materialise them before any concurrent use.
    for (const auto& c : contribs) tensor(c.component, static_cast<int>(c.ks.size()));
    auto one = [&](std::size_t i) {
        const auto& c = contribs[i];
        std::vector<VectorPolynomial> args;
        for (int k : c.ks) args.push_back(qs[static_cast<std::size_t>(k - 1)]);
        const auto& t = tensors_.at(c.component)[c.ks.size()];
        return apply_to_polynomials(t, args) * c.weight;
    };
    const auto parts = parallel ? parallel_map(contribs.size(), one) : serial_map(contribs.size(), one);
    VectorPolynomial sum(d);
    for (const auto& p : parts) sum += p;
    return sum;
}

VectorPolynomial ExpansionEngine::build_jn_ordered(int n, const std::vector<VectorPolynomial>& qs) {
    const int d = sd_.dimension;
    VectorPolynomial sum(d);
    if (n == 1) return sum;
    if (static_cast<int>(qs.size()) < n - 1) throw Error(ErrorKind::MissingPredecessor, "missing predecessors");
    const Rational target = lattice_.elements[static_cast<std::size_t>(n - 1)].tilde;
    for (int r = 0;; ++r) {
        const auto a = alpha(r);
        if (!a) break;
        const Rational base = *a * lambda_star_;
        if (base > target) break;
        const Rational rem = target - base;
        if (rem.is_zero()) {
            sum += apply_to_polynomials(tensor(r, 0), {});
            continue;
        }
        std::vector<int> ks;
        std::function<void(const Rational&)> rec = [&](const Rational& left) {
            for (int k = 2; k <= n - 1; ++k) {
                const Rational& tk = lattice_.elements[static_cast<std::size_t>(k - 1)].tilde;
                if (tk > left) break;
                ks.push_back(k);
                if (tk == left) {
                    std::vector<VectorPolynomial> args;
                    for (int kk : ks) args.push_back(qs[static_cast<std::size_t>(kk - 1)]);
                    sum += apply_to_polynomials(tensor(r, static_cast<int>(ks.size())), args);
                } else {
                    rec(left - tk);
                }
                ks.pop_back();
            }
        };
        rec(rem);
    }
    return sum;
}

// ------------------------------------------------------------------- expand

int finite_mode_limit(const NonlinearitySpec& spec, const ExponentLattice& lattice) {
    const auto comps = spec.components();
    if (comps.empty()) return lattice.size();
    const Rational bound = lattice.lambda_star * (comps.back().degree + spec.remainder_exponent);
    int nbar = 0;
    for (const auto& e : lattice.elements)
        if (e.mu < bound) ++nbar;
    return nbar;
}

Vec evaluate_series(const ExpansionSeries& series, double t, int n_terms) {
    const int n = std::min(n_terms, series.size());
    const int d = static_cast<int>(series.xi.size());
    Vec sum = Vec::Zero(d), comp = Vec::Zero(d);
    for (int k = 0; k < n; ++k) {
        const auto& term = series.terms[static_cast<std::size_t>(k)];
        const Vec v = term.q.is_zero() ? Vec::Zero(d) : Vec(term.q.eval(t) * std::exp(-term.mu.to_double() * t));
        for (int i = 0; i < d; ++i) {
            // Neumaier summation.
            const double s = sum[i] + v[i];
            if (std::fabs(sum[i]) >= std::fabs(v[i]))
                comp[i] += (sum[i] - s) + v[i];
            else
                comp[i] += (v[i] - s) + sum[i];
            sum[i] = s;
        }
    }
    return sum + comp;
}

Vec fit_resonant_constant(const SpectralData& sd, const Trajectory& traj, const ExpansionSeries& partial,
                          const Rational& mu, int block, const VectorPolynomial& particular) {
    const int d = sd.dimension;
    const double m = mu.to_double();
    const Mat& r = sd.projections[static_cast<std::size_t>(block)];
    std::vector<Vec> vals;
    for (std::size_t k = 0; k < traj.samples.size(); ++k) {
        const double t = traj.samples[k].t;
        Vec w = traj.scaled(k, m);
        for (const auto& term : partial.terms) {
            if (term.q.is_zero()) continue;
            w -= term.q.eval(t) * std::exp((m - term.mu.to_double()) * t);
        }
        w -= particular.eval(t);
        Vec v = r * w;
        if (!v.allFinite()) break;
        vals.push_back(std::move(v));
    }
    if (vals.empty()) return Vec::Zero(d);
    const std::size_t width = std::min(vals.size(), std::max<std::size_t>(20, vals.size() / 20));
    double best_spread = HUGE_VAL;
    std::size_t best = 0;
    for (std::size_t s = 0; s + width <= vals.size(); ++s) {
        Vec lo = vals[s], hi = vals[s];
        for (std::size_t k = s + 1; k < s + width; ++k) {
            lo = lo.cwiseMin(vals[k]);
            hi = hi.cwiseMax(vals[k]);
        }
        const double spread = (hi - lo).maxCoeff();
        if (spread < best_spread) {
            best_spread = spread;
            best = s;
        }
    }
    Vec mean = Vec::Zero(d);
    for (std::size_t k = best; k < best + width; ++k) mean += vals[k];
    return r * (mean / static_cast<double>(width));
}

ExpansionSeries expand(const SpectralData& sd, const NonlinearitySpec& spec, const Rational& lambda_star,
                       const Vec& xi, const ExpandOptions& options) {
    if (options.n_terms < 1) throw Error(ErrorKind::InvalidInput, "number of terms must be at least 1");
    if (xi.size() != sd.dimension) throw Error(ErrorKind::InvalidInput, "xi has the wrong dimension");
    if (options.policy == ResonancePolicy::Fit && options.trajectory == nullptr)
        throw Error(ErrorKind::InvalidInput, "the fit resonance policy needs a trajectory");
    const auto gate = smoothness_domain_check(spec, xi);
    if (!gate.applicable)
        throw Error(ErrorKind::InapplicableAtXi, "F is not smooth near xi*: " + [&] {
            std::string s;
            for (std::size_t i = 0; i < gate.offending.size(); ++i) s += (i ? ", " : "") + gate.offending[i];
            return s;
        }());

    const int n_max = options.n_terms;
    ExpansionEngine engine(sd, spec, lambda_star, xi, n_max + 1, options.tensor_cap);
    ExpansionSeries series;
    series.lambda_star = lambda_star;
    series.xi = xi;
    series.policy = options.policy;
    series.mode = spec.mode;
    series.lattice = engine.lattice();

    if (spec.mode == SpecMode::FiniteWithRemainder) {
        int count = n_max + 1;
        ExponentLattice wide = engine.lattice();
        const auto comps = spec.components();
        const Rational bound =
            comps.empty() ? Rational(0) : lambda_star * (comps.back().degree + spec.remainder_exponent);
        while (!wide.finite && wide.elements.back().mu < bound && count < 4096) {
            count *= 2;
            std::vector<Rational> alphas;
            for (const auto& c : comps) alphas.push_back(c.degree - Rational(1));
            wide = build_lattice(sd, lambda_star, alphas, count);
        }
        series.n_bar = finite_mode_limit(spec, wide);
        if (n_max > *series.n_bar)
            throw Error(ErrorKind::FiniteModeExceeded, "requested " + std::to_string(n_max) +
                                                           " terms but the remainder order allows only N-bar = " +
                                                           std::to_string(*series.n_bar));
    }

    const int available = std::min(n_max, engine.lattice().size());
    if (available < n_max)
        series.warnings.push_back("rate set has only " + std::to_string(available) + " elements");
    if (options.policy == ResonancePolicy::Zero)
        series.warnings.push_back("zero resonance policy: resonant constants set to 0 (formal normal form)");

    std::vector<VectorPolynomial> qs;
    for (int n = 1; n <= available; ++n) {
        const auto& el = engine.lattice().elements[static_cast<std::size_t>(n - 1)];
        ExpansionTerm term;
        term.n = n;
        term.tilde = el.tilde;
        term.mu = el.mu;
        for (int j = 0; j < sd.distinct_count(); ++j)
            if (sd.distinct[static_cast<std::size_t>(j)] == el.mu) term.resonant_blocks.push_back(j);
        if (n == 1) {
            term.j = VectorPolynomial(sd.dimension);
            term.q = VectorPolynomial::constant(xi);
            term.resonant_constants.push_back(xi);
        } else {
            term.contributions = static_cast<int>(engine.jn_contributions(n).size());
            term.j = engine.build_jn(n, qs, options.parallel);
            std::vector<Vec> consts(static_cast<std::size_t>(sd.distinct_count()));
            if (options.policy == ResonancePolicy::Fit && !term.resonant_blocks.empty()) {
                const VectorPolynomial particular = solve_polynomial_ode(sd, el.mu, term.j);
                for (int j : term.resonant_blocks)
                    consts[static_cast<std::size_t>(j)] =
                        fit_resonant_constant(sd, *options.trajectory, series, el.mu, j, particular);
            }
            for (int j : term.resonant_blocks) {
                auto& c = consts[static_cast<std::size_t>(j)];
                if (c.size() != sd.dimension) c = Vec::Zero(sd.dimension);
                term.resonant_constants.push_back(c);
            }
            term.q = solve_polynomial_ode(sd, el.mu, term.j, consts);
        }
        qs.push_back(term.q);
        series.terms.push_back(std::move(term));
    }
    return series;
}

}  // namespace asympode
