#pragma once

#include "asympode/linalg.hpp"

#include <Eigen/Dense>

namespace asympode {

using ScalarSeries = Eigen::RowVectorXd;

/// q(t) = sum_k c_k t^k with d-vector coefficients, stored as the columns of a
/// d x (D+1) matrix. The zero polynomial has no columns.
class VectorPolynomial {
public:
    VectorPolynomial() = default;
    explicit VectorPolynomial(int dim) : coeffs_(dim, 0) {}
    explicit VectorPolynomial(Mat coeffs);
    static VectorPolynomial constant(const Vec& v);

    int dim() const { return static_cast<int>(coeffs_.rows()); }
    /// -1 for the zero polynomial.
    int degree() const { return static_cast<int>(coeffs_.cols()) - 1; }
    bool is_zero() const { return coeffs_.cols() == 0; }
    const Mat& coeffs() const { return coeffs_; }
    Vec coeff(int k) const;

    Vec eval(double t) const;
    VectorPolynomial derivative() const;
    /// Antiderivative vanishing at t = 0.
    VectorPolynomial antiderivative() const;

    VectorPolynomial operator+(const VectorPolynomial& o) const;
    VectorPolynomial operator-(const VectorPolynomial& o) const;
    VectorPolynomial operator*(double c) const;
    VectorPolynomial& operator+=(const VectorPolynomial& o);
    /// Product with a scalar polynomial s(t) given by its coefficients.
    VectorPolynomial times(const ScalarSeries& s) const;
    /// Left multiplication by a matrix.
    VectorPolynomial left(const Mat& m) const;
    /// Scalar polynomial of output coordinate i.
    ScalarSeries row(int i) const { return coeffs_.row(i); }

    bool operator==(const VectorPolynomial& o) const;
    double max_abs_coeff() const { return coeffs_.size() ? coeffs_.cwiseAbs().maxCoeff() : 0.0; }

private:
    void trim();
    Mat coeffs_;
};

}  // namespace asympode
