#pragma once

#include <cstdint>
#include <compare>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

namespace asympode {

/// Exact rational on 64-bit numerator/denominator. Arithmetic goes through
/// 128-bit intermediates and throws Error(Overflow) instead of wrapping.
/// Always normalised: gcd(num, den) == 1 and den > 0.
class Rational {
public:
    constexpr Rational() = default;
    Rational(std::int64_t value) : num_(value), den_(1) {}  // NOLINT(implicit)
    Rational(std::int64_t num, std::int64_t den);

    std::int64_t num() const noexcept { return num_; }
    std::int64_t den() const noexcept { return den_; }

    double to_double() const noexcept {
        return static_cast<double>(num_) / static_cast<double>(den_);
    }
    bool is_integer() const noexcept { return den_ == 1; }
    bool is_zero() const noexcept { return num_ == 0; }
    int sign() const noexcept { return (num_ > 0) - (num_ < 0); }

    /// "a" for integers, "a/b" otherwise.
    std::string str() const;

    /// Parses "3", "-3/2", "0.125", "1e-3", "2.5e2". Decimals are converted
    /// exactly. Throws Error(InvalidInput) on malformed text.
    static Rational parse(std::string_view text);

    Rational operator-() const;
    friend Rational operator+(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a, const Rational& b);
    friend Rational operator*(const Rational& a, const Rational& b);
    friend Rational operator/(const Rational& a, const Rational& b);
    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    friend bool operator==(const Rational& a, const Rational& b) noexcept {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) noexcept;

    /// Largest integer <= value / smallest integer >= value.
    std::int64_t floor() const noexcept;
    std::int64_t ceil() const noexcept;

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

std::ostream& operator<<(std::ostream& os, const Rational& r);

/// Continued-fraction reconstruction: the convergent with the smallest
/// denominator (<= max_den) lying within `tol` of `x`, if any.
std::optional<Rational> snap_rational(double x, double tol, std::int64_t max_den = 1000000);

/// Best convergent of `x` with denominator <= max_den (always succeeds for finite x
/// of moderate size).
Rational best_rational(double x, std::int64_t max_den);

}  // namespace asympode

template <>
struct std::hash<asympode::Rational> {
    std::size_t operator()(const asympode::Rational& r) const noexcept {
        const auto h1 = std::hash<std::int64_t>{}(r.num());
        const auto h2 = std::hash<std::int64_t>{}(r.den());
        return h1 ^ (h2 + 0x9e3779b97f4a7c15ULL + (h1 << 6) + (h1 >> 2));
    }
};
