#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace cotkd {

/// Exact rational number, always stored reduced with a positive denominator.
class Rational {
public:
    using Int = boost::multiprecision::cpp_int;

    Rational() = default;
    Rational(std::int64_t v) : value_(v) {}  // NOLINT: implicit from integers is intended
    Rational(const Int& num, const Int& den);

    /// Parses "-12", "3.25", ".5", "7/2". No decorations; see normalize_number for those.
    static Rational parse(std::string_view text);

    Int numerator() const;
    Int denominator() const;
    bool is_integer() const { return denominator() == 1; }
    bool is_zero() const { return value_ == 0; }
    bool is_negative() const { return value_ < 0; }
    /// True when the decimal expansion terminates (denominator has only factors 2 and 5).
    bool is_terminating() const;

    Int floor() const;

    /// Canonical display: integer when the denominator is 1, otherwise at most
    /// six decimal places (half away from zero) with trailing zeros trimmed.
    std::string render() const;
    /// Lossless text: full decimal expansion when it terminates, else "p/q".
    std::string exact_string() const;
    /// Fixed number of decimals, rounded half away from zero.
    std::string fixed(int places) const;

    Rational operator-() const;
    friend Rational operator+(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a, const Rational& b);
    friend Rational operator*(const Rational& a, const Rational& b);
    /// Throws Error(DivisionByZero).
    friend Rational operator/(const Rational& a, const Rational& b);

    friend bool operator==(const Rational& a, const Rational& b) { return a.value_ == b.value_; }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

private:
    explicit Rational(boost::multiprecision::cpp_rational v) : value_(std::move(v)) {}

    boost::multiprecision::cpp_rational value_{0};
};

}  // namespace cotkd
