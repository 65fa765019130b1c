#include "asympode/rational.hpp"

#include "asympode/error.hpp"

#include <cmath>
#include <cctype>
#include <limits>
#include <numeric>

namespace asympode {

namespace {

using i128 = __int128;

std::int64_t narrow(i128 v) {
    if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
        throw Error(ErrorKind::Overflow, "rational arithmetic overflow");
    return static_cast<std::int64_t>(v);
}

i128 gcd128(i128 a, i128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        i128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

Rational make(i128 num, i128 den) {
    if (den == 0) throw Error(ErrorKind::InvalidInput, "rational with zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    i128 g = gcd128(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    return Rational(narrow(num), narrow(den));
}

// Parses an unsigned or signed decimal like "12.5e-3" into num/den exactly.
bool parse_decimal(std::string_view s, i128& num, i128& den) {
    std::size_t i = 0;
    bool neg = false;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
        neg = s[i] == '-';
        ++i;
    }
    i128 mant = 0;
    int frac_digits = 0;
    bool any = false;
    bool dot = false;
    const i128 cap = static_cast<i128>(1) << 100;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            mant = mant * 10 + (c - '0');
            if (mant > cap) return false;
            if (dot) ++frac_digits;
            any = true;
        } else if (c == '.' && !dot) {
            dot = true;
        } else {
            break;
        }
    }
    if (!any) return false;
    int exp10 = 0;
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        ++i;
        bool eneg = false;
        if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
            eneg = s[i] == '-';
            ++i;
        }
        bool edig = false;
        for (; i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])); ++i) {
            exp10 = exp10 * 10 + (s[i] - '0');
            if (exp10 > 40) return false;
            edig = true;
        }
        if (!edig) return false;
        if (eneg) exp10 = -exp10;
    }
    if (i != s.size()) return false;
    exp10 -= frac_digits;
    num = neg ? -mant : mant;
    den = 1;
    for (; exp10 > 0; --exp10) {
        num *= 10;
        if (num > cap || num < -cap) return false;
    }
    for (; exp10 < 0; ++exp10) {
        den *= 10;
        if (den > cap) return false;
    }
    return true;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
    if (den == 0) throw Error(ErrorKind::InvalidInput, "rational with zero denominator");
    i128 n = num, d = den;
    if (d < 0) {
        n = -n;
        d = -d;
    }
    i128 g = gcd128(n, d);
    if (g > 1) {
        n /= g;
        d /= g;
    }
    num_ = narrow(n);
    den_ = narrow(d);
}

std::string Rational::str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational Rational::parse(std::string_view text) {
    std::string_view s = trim(text);
    if (s.empty()) throw Error(ErrorKind::InvalidInput, "empty rational literal");
    auto slash = s.find('/');
    i128 n1, d1;
    if (slash == std::string_view::npos) {
        if (!parse_decimal(s, n1, d1))
            throw Error(ErrorKind::InvalidInput, "malformed number '" + std::string(s) + "'");
        return make(n1, d1);
    }
    i128 n2, d2;
    if (!parse_decimal(trim(s.substr(0, slash)), n1, d1) ||
        !parse_decimal(trim(s.substr(slash + 1)), n2, d2))
        throw Error(ErrorKind::InvalidInput, "malformed rational '" + std::string(s) + "'");
    if (n2 == 0) throw Error(ErrorKind::InvalidInput, "rational with zero denominator");
    return make(n1 * d2, d1 * n2);
}

Rational Rational::operator-() const {
    return make(-static_cast<i128>(num_), den_);
}

Rational operator+(const Rational& a, const Rational& b) {
    return make(static_cast<i128>(a.num_) * b.den_ + static_cast<i128>(b.num_) * a.den_,
                static_cast<i128>(a.den_) * b.den_);
}

Rational operator-(const Rational& a, const Rational& b) {
    return make(static_cast<i128>(a.num_) * b.den_ - static_cast<i128>(b.num_) * a.den_,
                static_cast<i128>(a.den_) * b.den_);
}

Rational operator*(const Rational& a, const Rational& b) {
    return make(static_cast<i128>(a.num_) * b.num_, static_cast<i128>(a.den_) * b.den_);
}

Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw Error(ErrorKind::InvalidInput, "division by zero rational");
    return make(static_cast<i128>(a.num_) * b.den_, static_cast<i128>(a.den_) * b.num_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) noexcept {
    i128 l = static_cast<i128>(a.num_) * b.den_;
    i128 r = static_cast<i128>(b.num_) * a.den_;
    if (l < r) return std::strong_ordering::less;
    if (l > r) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

std::int64_t Rational::floor() const noexcept {
    std::int64_t q = num_ / den_;
    if (num_ % den_ != 0 && num_ < 0) --q;
    return q;
}

std::int64_t Rational::ceil() const noexcept {
    std::int64_t q = num_ / den_;
    if (num_ % den_ != 0 && num_ > 0) ++q;
    return q;
}

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

std::optional<Rational> snap_rational(double x, double tol, std::int64_t max_den) {
    if (!std::isfinite(x) || std::fabs(x) > 1e15) return std::nullopt;
    // Convergents h/k of the continued fraction of x.
    double r = x;
    i128 h0 = 1, h1 = static_cast<i128>(std::floor(r));
    i128 k0 = 0, k1 = 1;
    for (int iter = 0; iter < 64; ++iter) {
        if (std::fabs(static_cast<double>(h1) / static_cast<double>(k1) - x) <= tol)
            return Rational(narrow(h1), narrow(k1));
        double frac = r - std::floor(r);
        if (frac < 1e-300) break;
        r = 1.0 / frac;
        if (!std::isfinite(r) || r > 1e18) break;
        i128 a = static_cast<i128>(std::floor(r));
        i128 h2 = a * h1 + h0;
        i128 k2 = a * k1 + k0;
        if (k2 > max_den) break;
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
    }
    return std::nullopt;
}

Rational best_rational(double x, std::int64_t max_den) {
    if (!std::isfinite(x) || std::fabs(x) > 1e15)
        throw Error(ErrorKind::InvalidInput, "cannot approximate non-finite value");
    double r = x;
    i128 h0 = 1, h1 = static_cast<i128>(std::floor(r));
    i128 k0 = 0, k1 = 1;
    for (int iter = 0; iter < 64; ++iter) {
        double frac = r - std::floor(r);
        if (frac < 1e-300) break;
        r = 1.0 / frac;
        if (!std::isfinite(r) || r > 1e18) break;
        i128 a = static_cast<i128>(std::floor(r));
        i128 h2 = a * h1 + h0;
        i128 k2 = a * k1 + k0;
        if (k2 > max_den) break;
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
    }
    return Rational(narrow(h1), narrow(k1));
}

}  // namespace asympode
