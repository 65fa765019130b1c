#include "asympode/spectral.hpp"

#include "asympode/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace asympode {

int SpectralData::index_of(const Rational& lambda) const {
    for (std::size_t j = 0; j < distinct.size(); ++j)
        if (distinct[j] == lambda) return static_cast<int>(j);
    return -1;
}

SpectralData decompose(const Mat& a, double snap_tol) {
    if (a.rows() == 0 || a.rows() != a.cols())
        throw Error(ErrorKind::InvalidInput, "matrix must be square and nonempty");
    if (!a.allFinite()) throw Error(ErrorKind::InvalidInput, "matrix has non-finite entries");
    const int d = static_cast<int>(a.rows());
    const double scale = std::max(1.0, a.norm());

    Eigen::EigenSolver<Mat> es(a, false);
    if (es.info() != Eigen::Success)
        throw Error(ErrorKind::NotDiagonalizable, "eigenvalue iteration did not converge");
    std::vector<double> re(d);
    for (int i = 0; i < d; ++i) {
        auto ev = es.eigenvalues()[i];
        if (std::fabs(ev.imag()) > 1e-9 * scale)
            throw Error(ErrorKind::ComplexSpectrum,
                        "nonreal eigenvalue " + std::to_string(ev.real()) + (ev.imag() < 0 ? "-" : "+") +
                            std::to_string(std::fabs(ev.imag())) + "i");
        re[i] = ev.real();
    }
    std::sort(re.begin(), re.end());

    SpectralData sd;
    sd.dimension = d;
    sd.matrix = a;

    // Group numerically equal eigenvalues.
    const double cluster_tol = 1e-7 * scale;
    std::vector<std::vector<double>> clusters;
    for (double v : re) {
        if (!clusters.empty() && std::fabs(v - clusters.back().back()) <= cluster_tol)
            clusters.back().push_back(v);
        else
            clusters.push_back({v});
    }

    std::vector<Mat> bases;
    for (const auto& c : clusters) {
        double mean = 0;
        for (double v : c) mean += v;
        mean /= static_cast<double>(c.size());
        if (mean <= snap_tol)
            throw Error(ErrorKind::NonPositiveSpectrum,
                        "eigenvalue " + std::to_string(mean) + " is not positive");
        Rational exact;
        if (auto r = snap_rational(mean, snap_tol)) {
            exact = *r;
        } else {
            exact = best_rational(mean, 1000000000);
            sd.snap_warning = true;
        }
        const int mult = static_cast<int>(c.size());

        Mat shifted = a - mean * Mat::Identity(d, d);
        Eigen::JacobiSVD<Mat> svd(shifted, Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        int null_dim = 0;
        for (int i = 0; i < d; ++i)
            if (sv[i] <= 1e-8 * scale) ++null_dim;
        if (null_dim < mult)
            throw Error(ErrorKind::NotDiagonalizable,
                        "eigenvalue " + exact.str() + " has algebraic multiplicity " + std::to_string(mult) +
                            " but geometric multiplicity " + std::to_string(null_dim));
        // Singular values are descending, so the null space is the trailing block of V.
        Mat basis = svd.matrixV().rightCols(mult);
        for (int k = 0; k < mult; ++k) {
            // Sign convention: first nonnegligible entry positive.
            for (int i = 0; i < d; ++i) {
                if (std::fabs(basis(i, k)) > 1e-12) {
                    if (basis(i, k) < 0) basis.col(k) = -basis.col(k);
                    break;
                }
            }
        }

        for (int k = 0; k < mult; ++k) {
            sd.eigenvalues.push_back(exact);
            sd.eigenvalues_float.push_back(mean);
        }
        sd.distinct.push_back(exact);
        sd.distinct_float.push_back(mean);
        sd.multiplicity.push_back(mult);
        bases.push_back(basis);
    }

    Mat s(d, d);
    int col = 0;
    for (const auto& b : bases) {
        s.middleCols(col, b.cols()) = b;
        col += static_cast<int>(b.cols());
    }
    Eigen::FullPivLU<Mat> lu(s);
    if (!lu.isInvertible())
        throw Error(ErrorKind::NotDiagonalizable, "eigenvectors do not span the space");
    Mat sinv = lu.inverse();
    col = 0;
    for (const auto& b : bases) {
        const int m = static_cast<int>(b.cols());
        sd.projections.push_back(s.middleCols(col, m) * sinv.middleRows(col, m));
        col += m;
    }
    sd.eigenvectors = std::move(bases);
    sd.c0 = estimate_c0(sd.projections);
    return sd;
}

Vec project(const SpectralData& sd, int j, const Vec& x) {
    if (j < 0 || j >= sd.distinct_count())
        throw Error(ErrorKind::IndexOutOfRange,
                    "eigenvalue index " + std::to_string(j) + " outside [0, " +
                        std::to_string(sd.distinct_count()) + ")");
    if (x.size() != sd.dimension)
        throw Error(ErrorKind::InvalidInput, "vector dimension mismatch in project");
    return sd.projections[j] * x;
}

double estimate_c0(const std::vector<Mat>& projections, int probes, unsigned seed) {
    if (projections.empty()) return 1.0;
    const auto d = projections.front().rows();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    double hi = 1.0, lo = 1.0;
    Vec x(d);
    for (int p = 0; p < probes; ++p) {
        for (Eigen::Index i = 0; i < d; ++i) x[i] = normal(rng);
        x.normalize();
        double s = 0;
        for (const auto& r : projections) s += (r * x).squaredNorm();
        hi = std::max(hi, s);
        lo = std::min(lo, s);
    }
    return std::max(1.0, 1.1 * std::max(hi, 1.0 / lo));
}

}  // namespace asympode
