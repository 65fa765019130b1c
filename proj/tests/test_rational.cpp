#include "asympode/rational.hpp"

#include "support.hpp"

#include <unordered_set>

using namespace asympode;
using namespace testing_support;

TEST_CASE("rational parsing is exact") {
    CHECK(Rational::parse("3") == Rational(3));
    CHECK(Rational::parse("-3/2") == Rational(-3, 2));
    CHECK(Rational::parse("0.125") == Rational(1, 8));
    CHECK(Rational::parse("1e-3") == Rational(1, 1000));
    CHECK(Rational::parse("2.5e1") == Rational(25));
    CHECK(Rational::parse("6/4").str() == "3/2");
    CHECK(kind_of([] { Rational::parse("1/0"); }) == ErrorKind::InvalidInput);
    CHECK(kind_of([] { Rational::parse("abc"); }) == ErrorKind::InvalidInput);
}

TEST_CASE("rational arithmetic and ordering") {
    const Rational a(1, 3), b(1, 4);
    CHECK(a + b == Rational(7, 12));
    CHECK(a - b == Rational(1, 12));
    CHECK(a * b == Rational(1, 12));
    CHECK(a / b == Rational(4, 3));
    CHECK(b < a);
    CHECK(Rational(-7, 2).floor() == Rational(-4));
    CHECK(Rational(-7, 2).ceil() == Rational(-3));
    CHECK(Rational(4, 2).is_integer());
    CHECK(Rational(0).is_zero());
    CHECK(Rational(-1, 3).sign() == -1);
    std::unordered_set<Rational> set{Rational(1, 2), Rational(2, 4), Rational(1, 3)};
    CHECK(set.size() == 2);
}

TEST_CASE("rational overflow is detected") {
    const Rational big(std::int64_t(1) << 62);
    CHECK(kind_of([&] { (void)(big * big); }) == ErrorKind::Overflow);
}

TEST_CASE("snapping recovers small-denominator rationals") {
    auto s = snap_rational(1.0 / 3.0 + 1e-12, 1e-9);
    REQUIRE(s.has_value());
    CHECK(*s == Rational(1, 3));
    CHECK(snap_rational(2.0, 1e-9) == Rational(2));
    CHECK(!snap_rational(3.14159265358979, 1e-15, 1000).has_value());
}
