#pragma once

#include "asympode/error.hpp"
#include "asympode/parser.hpp"
#include "asympode/spectral.hpp"
#include "asympode/termlang.hpp"

#include <doctest.h>

#include <random>
#include <string>

namespace testing_support {

using namespace asympode;

inline NonlinearitySpec spec_of(const std::string& text, int dim, std::map<std::string, Rational> params = {},
                                SpecMode mode = SpecMode::Infinite, Rational remainder = Rational(0)) {
    ParseOptions opt;
    opt.dim = dim;
    opt.params = std::move(params);
    opt.mode = mode;
    opt.remainder_exponent = remainder;
    return parse_nonlinearity(text, opt);
}

inline Mat mat(std::initializer_list<std::initializer_list<double>> rows) {
    Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index r = 0;
    for (const auto& row : rows) {
        Eigen::Index c = 0;
        for (double v : row) m(r, c++) = v;
        ++r;
    }
    return m;
}

inline Vec vec(std::initializer_list<double> v) {
    Vec out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

inline Vec random_vec(std::mt19937_64& rng, int d, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, 1.0);
    Vec v(d);
    for (int i = 0; i < d; ++i) v[i] = scale * n(rng);
    return v;
}

inline double rel_err(const Vec& a, const Vec& b) {
    const double s = std::max(b.norm(), 1e-300);
    return (a - b).norm() / s;
}

template <class Fn>
ErrorKind kind_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an asympode::Error");
    return ErrorKind::InvalidInput;
}

}  // namespace testing_support
