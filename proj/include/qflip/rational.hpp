#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qflip {

// Exact arbitrary-precision rational, the universal scalar of the library.
// cpp_rational keeps values in canonical form (positive denominator, gcd 1),
// so equality and ordering are exact.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline Rational rat(long num, long den = 1) { return Rational(num, den); }

inline double to_double(const Rational& x) { return x.convert_to<double>(); }

// Renders "num/den", or just "num" for integers.
inline std::string rat_str(const Rational& x) {
    if (denominator(x) == 1) return numerator(x).str();
    return numerator(x).str() + "/" + denominator(x).str();
}

// Parses "num/den", a plain integer, or an exact decimal/scientific literal
// such as "0.55" or "1e-9".  Every accepted form denotes an exact rational.
inline Rational parse_rational(std::string_view text) {
    auto bad = [&] { throw std::invalid_argument("not a rational: '" + std::string(text) + "'"); };
    if (text.empty()) bad();

    auto slash = text.find('/');
    if (slash != std::string_view::npos) {
        std::string num(text.substr(0, slash)), den(text.substr(slash + 1));
        if (num.empty() || den.empty()) bad();
        // strip leading zeros, boost would read them as an octal prefix
        auto strip = [](std::string& s) {
            std::string sign;
            if (!s.empty() && (s[0] == '+' || s[0] == '-')) sign = s[0], s.erase(0, 1);
            std::size_t nz = s.find_first_not_of('0');
            s = sign + (nz == std::string::npos ? (s.empty() ? "" : "0") : s.substr(nz));
        };
        strip(num);
        strip(den);
        if (num.empty() || den.empty()) bad();
        try {
            BigInt n(num), d(den);
            if (d == 0) throw std::invalid_argument("zero denominator: '" + std::string(text) + "'");
            return Rational(n, d);
        } catch (const std::runtime_error&) {
            bad();
        }
    }

    // decimal form: [+-]digits[.digits][e[+-]digits]
    std::size_t i = 0;
    bool neg = false;
    if (text[i] == '+' || text[i] == '-') neg = (text[i] == '-'), ++i;
    std::string digits;
    long frac_digits = 0, exponent = 0;
    bool any = false;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) digits += text[i++], any = true;
    if (i < text.size() && text[i] == '.') {
        ++i;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])))
            digits += text[i++], ++frac_digits, any = true;
    }
    if (!any) bad();
    if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
        ++i;
        bool eneg = false;
        if (i < text.size() && (text[i] == '+' || text[i] == '-')) eneg = (text[i] == '-'), ++i;
        if (i == text.size()) bad();
        long e = 0;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
            e = e * 10 + (text[i++] - '0');
            if (e > 100000) bad();
        }
        exponent = eneg ? -e : e;
    }
    if (i != text.size()) bad();

    // strip leading zeros, boost would read them as an octal prefix
    std::size_t nz = digits.find_first_not_of('0');
    digits = nz == std::string::npos ? "0" : digits.substr(nz);
    BigInt mant(digits);
    if (neg) mant = -mant;
    long net = exponent - frac_digits;
    Rational value(mant);
    BigInt ten(10);
    if (net > 0)
        value *= Rational(boost::multiprecision::pow(ten, static_cast<unsigned>(net)));
    else if (net < 0)
        value /= Rational(boost::multiprecision::pow(ten, static_cast<unsigned>(-net)));
    return value;
}

}  // namespace qflip
