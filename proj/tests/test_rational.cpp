#include "doctest.h"

#include "cotkd/error.hpp"
#include "cotkd/rational.hpp"

using cotkd::Errc;
using cotkd::Error;
using cotkd::Rational;

TEST_CASE("parse accepts integers, decimals and fractions") {
    CHECK(Rational::parse("42") == Rational(42));
    CHECK(Rational::parse("-12") == Rational(-12));
    CHECK(Rational::parse("3.25") == Rational(13, 4));
    CHECK(Rational::parse(".5") == Rational(1, 2));
    CHECK(Rational::parse("7/2") == Rational(7, 2));
    CHECK(Rational::parse("0.08") == Rational(2, 25));
    CHECK(Rational::parse("007") == Rational(7));
}

TEST_CASE("parse rejects junk") {
    for (const char* bad : {"", "-", ".", "1.2.3", "abc", "1e5", "1/", "/2", "12a"}) {
        CAPTURE(bad);
        try {
            (void)Rational::parse(bad);
            FAIL("expected NotANumber");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::NotANumber);
        }
    }
    try {
        (void)Rational::parse("3/0");
        FAIL("expected DivisionByZero");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::DivisionByZero);
    }
}

TEST_CASE("render trims and rounds half away from zero at six places") {
    CHECK(Rational(72).render() == "72");
    CHECK(Rational(-5, 2).render() == "-2.5");
    CHECK(Rational(1, 3).render() == "0.333333");
    CHECK(Rational(2, 3).render() == "0.666667");
    CHECK(Rational(-2, 3).render() == "-0.666667");
    CHECK(Rational(1, 2000000).render() == "0.000001");  // 0.0000005 rounds up
    CHECK(Rational(-1, 2000000).render() == "-0.000001");
    CHECK(Rational(1, 4000000).render() == "0");
    CHECK(Rational(1, 10).render() == "0.1");
}

TEST_CASE("exact_string is lossless") {
    CHECK(Rational(1, 8).exact_string() == "0.125");
    CHECK(Rational(1, 3).exact_string() == "1/3");
    CHECK(Rational(-7, 20).exact_string() == "-0.35");
    CHECK(Rational(5).exact_string() == "5");
    for (auto r : {Rational(1, 8), Rational(-7, 20), Rational(123456789, 1000)})
        CHECK(Rational::parse(r.exact_string()) == r);
}

TEST_CASE("arithmetic is exact") {
    CHECK(Rational(1, 3) + Rational(1, 6) == Rational(1, 2));
    CHECK(Rational::parse("0.1") + Rational::parse("0.2") == Rational::parse("0.3"));
    CHECK(Rational(3) * Rational(1, 3) == Rational(1));
    CHECK(Rational(7) / Rational(2) == Rational(7, 2));
    CHECK_THROWS_AS((void)(Rational(1) / Rational(0)), Error);
    CHECK(Rational(-7, 2).floor() == -4);
    CHECK(Rational(1, 3) < Rational(1, 2));
}

TEST_CASE("fixed pads to the requested places") {
    CHECK(Rational(1, 8).fixed(2) == "0.13");
    CHECK(Rational(-1, 8).fixed(2) == "-0.13");
    CHECK(Rational(5).fixed(2) == "5.00");
    CHECK(Rational(79362, 1000).fixed(2) == "79.36");
}

TEST_CASE("terminating decimals") {
    CHECK(Rational(1, 40).is_terminating());
    CHECK_FALSE(Rational(1, 6).is_terminating());
}
