#pragma once

#include "asympode/linalg.hpp"
#include "asympode/rational.hpp"

#include <vector>

namespace asympode {

/// Eigen-structure of a diagonalizable matrix with positive real spectrum.
struct SpectralData {
    int dimension = 0;
    Mat matrix;
    /// Eigenvalues with multiplicity, ascending.
    std::vector<Rational> eigenvalues;
    std::vector<double> eigenvalues_float;
    /// Distinct eigenvalues, ascending, and per-eigenvalue data in the same order.
    std::vector<Rational> distinct;
    std::vector<double> distinct_float;
    std::vector<int> multiplicity;
    std::vector<Mat> projections;
    /// Orthonormal eigenvector basis per distinct eigenvalue (columns).
    std::vector<Mat> eigenvectors;
    double c0 = 1.0;
    /// Set when some eigenvalue had no rational within the snap tolerance.
    bool snap_warning = false;

    int distinct_count() const { return static_cast<int>(distinct.size()); }

    /// Index of `lambda` among distinct eigenvalues, or -1.
    int index_of(const Rational& lambda) const;
};

/// Validates A (square, finite, real diagonalizable, positive spectrum) and
/// builds eigenvalues, projections and the norm-equivalence constant.
SpectralData decompose(const Mat& a, double snap_tol = 1e-9);

/// R_{lambda_j} x with j 0-based.
Vec project(const SpectralData& sd, int j, const Vec& x);

/// Estimate of c0 from `probes` seeded random unit vectors, inflated by 10%.
double estimate_c0(const std::vector<Mat>& projections, int probes = 1000, unsigned seed = 12345);

}  // namespace asympode
