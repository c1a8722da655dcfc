#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <stdexcept>
#include <string>

namespace mlines {

using Int = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline std::string to_string(const Int& v) { return v.str(); }

inline std::string to_string(const Rational& v)
{
    const Int num = boost::multiprecision::numerator(v);
    const Int den = boost::multiprecision::denominator(v);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

// Accepts "p", "-p", "p/q".
inline Rational parse_rational(const std::string& s)
{
    auto digits = [](std::string t) -> std::string {
        bool neg = false;
        if (!t.empty() && (t[0] == '-' || t[0] == '+')) {
            neg = t[0] == '-';
            t = t.substr(1);
        }
        if (t.empty()) return {};
        for (char c : t)
            if (c < '0' || c > '9') return {};
        return neg ? "-" + t : t;
    };
    const auto slash = s.find('/');
    const std::string num = digits(s.substr(0, slash));
    const std::string den = slash == std::string::npos ? "1" : digits(s.substr(slash + 1));
    if (num.empty() || den.empty()) throw std::invalid_argument("not a rational number: '" + s + "'");
    if (Int(den) == 0) throw std::invalid_argument("zero denominator in '" + s + "'");
    return Rational(Int(num), Int(den));
}

}  // namespace mlines
