#pragma once

#include "asympode/dynamics.hpp"
#include "asympode/exponents.hpp"
#include "asympode/polynomial.hpp"
#include "asympode/spectral.hpp"
#include "asympode/tensors.hpp"
#include "asympode/termlang.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace asympode {

enum class ResonancePolicy { Zero, Fit };

std::string policy_name(ResonancePolicy p);
ResonancePolicy parse_policy(const std::string& name);

/// Solves q' + (A - mu I) q = p block by block over the spectral projections.
/// Non-resonant blocks use back-substitution from the top degree; a resonant
/// block (lambda_j == mu exactly) is R_j c_j + antiderivative of R_j p.
/// `resonant_constants[j]` supplies c_j (missing or empty means zero).
VectorPolynomial solve_polynomial_ode(const SpectralData& sd, const Rational& mu, const VectorPolynomial& p,
                                      const std::vector<Vec>& resonant_constants = {});

struct ExpansionTerm {
    int n = 0;  // 1-based
    Rational tilde;
    Rational mu;
    VectorPolynomial q;
    VectorPolynomial j;
    /// Distinct-eigenvalue indices with lambda_j == mu_n, and the constants used there.
    std::vector<int> resonant_blocks;
    std::vector<Vec> resonant_constants;
    /// Number of (r, m, multiset) contributions summed into J_n.
    int contributions = 0;
};

struct ExpansionSeries {
    Rational lambda_star;
    Vec xi;
    ExponentLattice lattice;
    std::vector<ExpansionTerm> terms;
    ResonancePolicy policy = ResonancePolicy::Zero;
    SpecMode mode = SpecMode::Infinite;
    /// N-bar in finite-with-remainder mode.
    std::optional<int> n_bar;
    std::vector<std::string> warnings;

    int size() const { return static_cast<int>(terms.size()); }
};

/// One contribution F_{r,m}(q_{k_1}, ..., q_{k_m}) with multiset weight m! / prod(mult!).
struct JnContribution {
    int component = 0;        // r, 0-based
    std::vector<int> ks;      // nondecreasing, 1-based term indices in [2, n-1]
    double weight = 1.0;
};

/// Lazily materialised components, tensors and lattice for one problem.
class ExpansionEngine {
public:
    ExpansionEngine(const SpectralData& sd, const NonlinearitySpec& spec, const Rational& lambda_star, const Vec& xi,
                    int lattice_size, int tensor_cap = kDefaultTensorOrderCap);

    const ExponentLattice& lattice() const { return lattice_; }
    const SpectralData& spectral() const { return sd_; }

    /// Degree alpha_r = beta_r - 1 of component r (0-based), materialising as needed.
    std::optional<Rational> alpha(int r);
    const HomogeneousComponent& component(int r);
    /// Tensors of component r up to `order` (recomputed at higher order on demand).
    const DerivativeTensor& tensor(int r, int order);

    /// Index sets of J_n in deterministic order (r ascending, then m, then multisets lexicographic).
    std::vector<JnContribution> jn_contributions(int n);
    /// J_n from previously computed q_1..q_{n-1} (qs[k-1] = q_k). Throws MissingPredecessor.
    VectorPolynomial build_jn(int n, const std::vector<VectorPolynomial>& qs, bool parallel = true);
    /// Reference: sum over ordered tuples (k_1, ..., k_m) without multiset weighting.
    VectorPolynomial build_jn_ordered(int n, const std::vector<VectorPolynomial>& qs);

private:
    const SpectralData& sd_;
    const NonlinearitySpec& spec_;
    Rational lambda_star_;
    Vec xi_;
    int tensor_cap_;
    std::vector<HomogeneousComponent> components_;
    bool components_exhausted_ = false;
    std::map<int, std::vector<DerivativeTensor>> tensors_;
    ExponentLattice lattice_;
};

struct ExpandOptions {
    int n_terms = 3;
    ResonancePolicy policy = ResonancePolicy::Zero;
    /// Needed for the `fit` policy.
    const Trajectory* trajectory = nullptr;
    int tensor_cap = kDefaultTensorOrderCap;
    bool parallel = true;
};

/// N-bar = max{N : lambda* (beta_{N*} + eps) > mu_N} for finite-with-remainder specs.
int finite_mode_limit(const NonlinearitySpec& spec, const ExponentLattice& lattice);

/// Runs the recursion for n = 1..N. Throws InapplicableAtXi (smoothness gate at xi)
/// and FiniteModeExceeded (N > N-bar).
ExpansionSeries expand(const SpectralData& sd, const NonlinearitySpec& spec, const Rational& lambda_star,
                       const Vec& xi, const ExpandOptions& options);

/// sum_{n <= N} q_n(t) e^{-mu_n t} with compensated summation.
Vec evaluate_series(const ExpansionSeries& series, double t, int n_terms);

/// Resonant constant for block j from a trajectory: plateau mean of
/// R_j (e^{mu t} u(t) - q_particular(t)), where u = y - partial series.
Vec fit_resonant_constant(const SpectralData& sd, const Trajectory& traj, const ExpansionSeries& partial,
                          const Rational& mu, int block, const VectorPolynomial& particular);

}  // namespace asympode
