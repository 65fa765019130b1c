#include "asympode/polynomial.hpp"

#include "asympode/error.hpp"

#include <algorithm>

namespace asympode {

VectorPolynomial::VectorPolynomial(Mat coeffs) : coeffs_(std::move(coeffs)) { trim(); }

VectorPolynomial VectorPolynomial::constant(const Vec& v) {
    Mat c(v.size(), 1);
    c.col(0) = v;
    return VectorPolynomial(std::move(c));
}

void VectorPolynomial::trim() {
    Eigen::Index n = coeffs_.cols();
    while (n > 0 && (coeffs_.col(n - 1).array() == 0.0).all()) --n;
    if (n != coeffs_.cols()) coeffs_.conservativeResize(Eigen::NoChange, n);
}

Vec VectorPolynomial::coeff(int k) const {
    if (k < 0 || k > degree()) return Vec::Zero(dim());
    return coeffs_.col(k);
}

Vec VectorPolynomial::eval(double t) const {
    Vec out = Vec::Zero(dim());
    for (int k = degree(); k >= 0; --k) out = out * t + coeffs_.col(k);
    return out;
}

VectorPolynomial VectorPolynomial::derivative() const {
    if (degree() < 1) return VectorPolynomial(dim());
    Mat c(dim(), degree());
    for (int k = 1; k <= degree(); ++k) c.col(k - 1) = coeffs_.col(k) * static_cast<double>(k);
    return VectorPolynomial(std::move(c));
}

VectorPolynomial VectorPolynomial::antiderivative() const {
    if (is_zero()) return *this;
    Mat c = Mat::Zero(dim(), degree() + 2);
    for (int k = 0; k <= degree(); ++k) c.col(k + 1) = coeffs_.col(k) / static_cast<double>(k + 1);
    return VectorPolynomial(std::move(c));
}

VectorPolynomial VectorPolynomial::operator+(const VectorPolynomial& o) const {
    VectorPolynomial r = *this;
    r += o;
    return r;
}

VectorPolynomial& VectorPolynomial::operator+=(const VectorPolynomial& o) {
    if (o.is_zero()) return *this;
    if (coeffs_.rows() == 0 && coeffs_.cols() == 0) {
        coeffs_ = o.coeffs_;
        return *this;
    }
    if (o.dim() != dim()) throw Error(ErrorKind::InvalidInput, "polynomial dimension mismatch");
    if (o.coeffs_.cols() > coeffs_.cols()) {
        const Eigen::Index old = coeffs_.cols();
        coeffs_.conservativeResize(Eigen::NoChange, o.coeffs_.cols());
        coeffs_.rightCols(o.coeffs_.cols() - old).setZero();
    }
    coeffs_.leftCols(o.coeffs_.cols()) += o.coeffs_;
    trim();
    return *this;
}

VectorPolynomial VectorPolynomial::operator-(const VectorPolynomial& o) const { return *this + o * -1.0; }

VectorPolynomial VectorPolynomial::operator*(double c) const { return VectorPolynomial(Mat(coeffs_ * c)); }

VectorPolynomial VectorPolynomial::times(const ScalarSeries& s) const {
    if (is_zero() || s.size() == 0) return VectorPolynomial(dim());
    Mat c = Mat::Zero(dim(), coeffs_.cols() + s.size() - 1);
    for (Eigen::Index a = 0; a < coeffs_.cols(); ++a)
        for (Eigen::Index b = 0; b < s.size(); ++b)
            if (s[b] != 0) c.col(a + b) += coeffs_.col(a) * s[b];
    return VectorPolynomial(std::move(c));
}

VectorPolynomial VectorPolynomial::left(const Mat& m) const {
    if (is_zero()) return VectorPolynomial(static_cast<int>(m.rows()));
    return VectorPolynomial(Mat(m * coeffs_));
}

bool VectorPolynomial::operator==(const VectorPolynomial& o) const {
    return coeffs_.rows() == o.coeffs_.rows() && coeffs_.cols() == o.coeffs_.cols() &&
           (coeffs_.size() == 0 || coeffs_ == o.coeffs_);
}

}  // namespace asympode
