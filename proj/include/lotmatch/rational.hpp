#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <stdexcept>
#include <string>

namespace lotmatch {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// Rounds to `dp` decimal places, half away from zero, staying in exact arithmetic.
inline Rational round_decimal(const Rational& x, int dp = 2) {
    BigInt scale = 1;
    for (int i = 0; i < dp; ++i) scale *= 10;
    Rational scaled = x * scale;
    BigInt num = boost::multiprecision::numerator(scaled);
    BigInt den = boost::multiprecision::denominator(scaled);  // positive by canonical form
    BigInt q = num / den;
    BigInt rem = num - q * den;
    if (rem < 0) rem = -rem;
    if (2 * rem >= den) q += (num < 0) ? -1 : 1;
    return Rational(q, scale);
}

/// "361/729", or just "361" when the denominator is 1.
inline std::string to_fraction_string(const Rational& r) {
    BigInt num = boost::multiprecision::numerator(r);
    BigInt den = boost::multiprecision::denominator(r);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

/// Fixed-point rendering with `dp` decimals (half away from zero).
inline std::string to_decimal_string(const Rational& r, int dp = 2) {
    BigInt scale = 1;
    for (int i = 0; i < dp; ++i) scale *= 10;
    Rational rounded = round_decimal(r, dp) * scale;
    BigInt v = boost::multiprecision::numerator(rounded);  // integral after rounding
    bool neg = v < 0;
    if (neg) v = -v;
    BigInt whole = v / scale;
    BigInt frac = v % scale;
    std::string fs = frac.str();
    while ((int)fs.size() < dp) fs.insert(fs.begin(), '0');
    std::string out = (neg ? "-" : "") + whole.str();
    if (dp > 0) out += "." + fs;
    return out;
}

/// Parses "a/b", "a" or a plain decimal like "0.25".
inline Rational parse_rational(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("empty rational literal");
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        BigInt num(s.substr(0, slash));
        BigInt den(s.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("zero denominator in '" + s + "'");
        return Rational(num, den);
    }
    auto dot = s.find('.');
    if (dot == std::string::npos) return Rational(BigInt(s));
    std::string whole = s.substr(0, dot);
    std::string frac = s.substr(dot + 1);
    bool neg = !whole.empty() && whole[0] == '-';
    if (whole.empty() || whole == "-" || whole == "+") whole += "0";
    BigInt scale = 1;
    for (size_t i = 0; i < frac.size(); ++i) scale *= 10;
    BigInt num = BigInt(whole) * scale;
    BigInt f = frac.empty() ? BigInt(0) : BigInt(frac);
    num += neg ? -f : f;
    return Rational(num, scale);
}

}  // namespace lotmatch
