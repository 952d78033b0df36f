#include "cotkd/rational.hpp"

#include "cotkd/error.hpp"

#include <cctype>

namespace cotkd {

namespace mp = boost::multiprecision;

namespace {

Rational::Int pow10(int n) {
    Rational::Int r = 1;
    for (int i = 0; i < n; ++i) r *= 10;
    return r;
}

// cpp_int reads a leading 0 as an octal prefix, so build the value by hand.
Rational::Int decimal_int(std::string_view digits) {
    Rational::Int v = 0;
    for (char c : digits) v = v * 10 + (c - '0');
    return v;
}

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

[[noreturn]] void not_a_number(std::string_view text) {
    throw Error(Errc::NotANumber, "not a number: '" + std::string(text) + "'");
}

}  // namespace

Rational::Rational(const Int& num, const Int& den) {
    if (den == 0) throw Error(Errc::DivisionByZero, "zero denominator");
    value_ = mp::cpp_rational(num, den);
}

Rational Rational::parse(std::string_view text) {
    std::string_view s = text;
    bool negative = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }
    Rational out;
    if (auto slash = s.find('/'); slash != std::string_view::npos) {
        auto num = s.substr(0, slash);
        auto den = s.substr(slash + 1);
        if (!all_digits(num) || !all_digits(den)) not_a_number(text);
        Int d = decimal_int(den);
        if (d == 0) throw Error(Errc::DivisionByZero, "zero denominator in '" + std::string(text) + "'");
        out = Rational(decimal_int(num), d);
    } else {
        auto dot = s.find('.');
        std::string_view whole = s.substr(0, dot);
        std::string_view frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
        if (whole.empty() && frac.empty()) not_a_number(text);
        if (!whole.empty() && !all_digits(whole)) not_a_number(text);
        if (!frac.empty() && !all_digits(frac)) not_a_number(text);
        std::string digits = std::string(whole) + std::string(frac);
        out = Rational(decimal_int(digits), pow10(static_cast<int>(frac.size())));
    }
    return negative ? -out : out;
}

Rational::Int Rational::numerator() const { return mp::numerator(value_); }
Rational::Int Rational::denominator() const { return mp::denominator(value_); }

bool Rational::is_terminating() const {
    Int d = denominator();
    while (d % 2 == 0) d /= 2;
    while (d % 5 == 0) d /= 5;
    return d == 1;
}

Rational::Int Rational::floor() const {
    Int n = numerator();
    Int d = denominator();
    Int q = n / d;  // truncates toward zero
    if (n < 0 && q * d != n) q -= 1;
    return q;
}

std::string Rational::fixed(int places) const {
    Int scale = pow10(places);
    Int n = mp::abs(numerator()) * scale;
    Int d = denominator();
    // round half away from zero: floor((2n + d) / 2d)
    Int q = (2 * n + d) / (2 * d);
    std::string digits = q.str();
    if (places > 0) {
        if (digits.size() <= static_cast<std::size_t>(places))
            digits.insert(0, static_cast<std::size_t>(places) + 1 - digits.size(), '0');
        digits.insert(digits.size() - static_cast<std::size_t>(places), ".");
    }
    if (is_negative() && q != 0) digits.insert(0, "-");
    return digits;
}

std::string Rational::render() const {
    if (is_integer()) return numerator().str();
    std::string s = fixed(6);
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
    if (s == "-0") s = "0";
    return s;
}

std::string Rational::exact_string() const {
    if (is_integer()) return numerator().str();
    if (!is_terminating()) return numerator().str() + "/" + denominator().str();
    int places = 0;
    Int d = denominator();
    Int p = 1;
    while (p % d != 0) {  // smallest 10^k divisible by d
        p *= 10;
        ++places;
    }
    return fixed(places);
}

Rational Rational::operator-() const { return Rational(mp::cpp_rational(-value_)); }

Rational operator+(const Rational& a, const Rational& b) { return Rational(mp::cpp_rational(a.value_ + b.value_)); }
Rational operator-(const Rational& a, const Rational& b) { return Rational(mp::cpp_rational(a.value_ - b.value_)); }
Rational operator*(const Rational& a, const Rational& b) { return Rational(mp::cpp_rational(a.value_ * b.value_)); }

Rational operator/(const Rational& a, const Rational& b) {
    if (b.is_zero()) throw Error(Errc::DivisionByZero, "division by zero");
    return Rational(mp::cpp_rational(a.value_ / b.value_));
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    if (a.value_ < b.value_) return std::strong_ordering::less;
    if (a.value_ > b.value_) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

}  // namespace cotkd
