#pragma once

#include "mlines/numbers.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mlines {

// Univariate integer polynomial in x; coeffs[k] is the coefficient of x^k.
class UniPoly {
public:
    UniPoly() = default;
    explicit UniPoly(std::vector<Int> coeffs) : c_(std::move(coeffs)) { trim(); }
    static UniPoly constant(const Int& v) { return UniPoly(std::vector<Int>{v}); }
    static UniPoly monomial(const Int& v, std::size_t degree)
    {
        std::vector<Int> c(degree + 1);
        c[degree] = v;
        return UniPoly(std::move(c));
    }
    static UniPoly x() { return monomial(1, 1); }

    const std::vector<Int>& coeffs() const { return c_; }
    bool is_zero() const { return c_.empty(); }
    // -1 for the zero polynomial.
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    Int coeff(std::size_t k) const { return k < c_.size() ? c_[k] : Int(0); }
    Int leading() const { return c_.empty() ? Int(0) : c_.back(); }

    UniPoly operator+(const UniPoly& o) const
    {
        std::vector<Int> r(std::max(c_.size(), o.c_.size()));
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = coeff(i) + o.coeff(i);
        return UniPoly(std::move(r));
    }
    UniPoly operator-() const
    {
        std::vector<Int> r = c_;
        for (auto& v : r) v = -v;
        return UniPoly(std::move(r));
    }
    UniPoly operator-(const UniPoly& o) const { return *this + (-o); }
    UniPoly operator*(const UniPoly& o) const
    {
        if (is_zero() || o.is_zero()) return {};
        std::vector<Int> r(c_.size() + o.c_.size() - 1);
        for (std::size_t i = 0; i < c_.size(); ++i) {
            if (c_[i] == 0) continue;
            for (std::size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
        }
        return UniPoly(std::move(r));
    }
    UniPoly operator*(const Int& s) const
    {
        std::vector<Int> r = c_;
        for (auto& v : r) v *= s;
        return UniPoly(std::move(r));
    }
    UniPoly& operator+=(const UniPoly& o) { return *this = *this + o; }
    UniPoly& operator*=(const UniPoly& o) { return *this = *this * o; }
    bool operator==(const UniPoly& o) const { return c_ == o.c_; }
    bool operator!=(const UniPoly& o) const { return !(*this == o); }

    // Exact division by x^k; throws if a low coefficient is nonzero.
    UniPoly divide_by_x_power(std::size_t k) const
    {
        for (std::size_t i = 0; i < k && i < c_.size(); ++i)
            if (c_[i] != 0) throw std::domain_error("polynomial not divisible by x^" + std::to_string(k));
        if (c_.size() <= k) return {};
        return UniPoly(std::vector<Int>(c_.begin() + static_cast<std::ptrdiff_t>(k), c_.end()));
    }

    Int eval(const Int& at) const
    {
        Int acc = 0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * at + *it;
        return acc;
    }

    // "x^4 + 4x^2 + 1", highest degree first.
    std::string str() const
    {
        if (c_.empty()) return "0";
        std::ostringstream out;
        bool first = true;
        for (int k = degree(); k >= 0; --k) {
            Int v = c_[static_cast<std::size_t>(k)];
            if (v == 0) continue;
            const bool neg = v < 0;
            if (neg) v = -v;
            if (first)
                out << (neg ? "-" : "");
            else
                out << (neg ? " - " : " + ");
            first = false;
            if (k == 0 || v != 1) out << v.str();
            if (k >= 1) out << "x";
            if (k >= 2) out << "^" << k;
        }
        return out.str();
    }

private:
    void trim()
    {
        while (!c_.empty() && c_.back() == 0) c_.pop_back();
    }
    std::vector<Int> c_;
};

inline UniPoly operator*(const Int& s, const UniPoly& p) { return p * s; }

inline nlohmann::json to_json(const UniPoly& p)
{
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : p.coeffs()) {
        // small values as numbers, large ones as strings to stay exact
        if (c >= Int(-(1LL << 53)) && c <= Int(1LL << 53))
            arr.push_back(static_cast<long long>(c));
        else
            arr.push_back(c.str());
    }
    return nlohmann::json{{"coeffs", arr}};
}

inline UniPoly uni_poly_from_json(const nlohmann::json& j)
{
    std::vector<Int> c;
    for (const auto& v : j.at("coeffs")) {
        if (v.is_string())
            c.emplace_back(v.get<std::string>());
        else
            c.emplace_back(v.get<long long>());
    }
    return UniPoly(std::move(c));
}

enum class ArithOp { add, sub, mul };

inline UniPoly uni_arith(const UniPoly& p, const UniPoly& q, ArithOp op)
{
    switch (op) {
    case ArithOp::add: return p + q;
    case ArithOp::sub: return p - q;
    case ArithOp::mul: return p * q;
    }
    return {};
}

// prod_{i=0}^{ell-1} (x^2 - k - i): virtual Poincare polynomial of the ordered
// configuration space of ell points in C minus k points.
inline UniPoly config_poly(unsigned ell, unsigned k)
{
    UniPoly r = UniPoly::constant(1);
    for (unsigned i = 0; i < ell; ++i)
        r *= UniPoly(std::vector<Int>{-Int(k + i), 0, 1});
    return r;
}

// prod_{j=2}^{m-1} (x^2 - j): m distinct points of C modulo affine maps.
inline UniPoly quotient_config_poly(unsigned m)
{
    UniPoly r = UniPoly::constant(1);
    for (unsigned j = 2; j + 1 <= m; ++j) r *= UniPoly(std::vector<Int>{-Int(j), 0, 1});
    return r;
}

// ---------------------------------------------------------------------------
// Multivariate polynomials with rational coefficients in named variables.

using Monomial = std::map<std::string, unsigned>;

inline unsigned total_degree(const Monomial& m)
{
    unsigned d = 0;
    for (const auto& [v, e] : m) d += e;
    return d;
}

// Graded lexicographic comparison, variables ordered by name (earlier name is
// the larger variable). Returns true if a > b.
inline bool grlex_greater(const Monomial& a, const Monomial& b)
{
    const unsigned da = total_degree(a), db = total_degree(b);
    if (da != db) return da > db;
    auto ia = a.begin(), ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (ia->first != ib->first) return ia->first < ib->first;
        if (ia->second != ib->second) return ia->second > ib->second;
        ++ia;
        ++ib;
    }
    return ia != a.end() && ib == b.end();
}

inline std::string monomial_str(const Monomial& m)
{
    std::string out;
    for (const auto& [v, e] : m) {
        if (!out.empty()) out += "*";
        out += v;
        if (e > 1) out += "^" + std::to_string(e);
    }
    return out;
}

class MultiPoly {
public:
    using Terms = std::map<Monomial, Rational>;

    MultiPoly() = default;
    MultiPoly(const Rational& c)  // NOLINT: implicit constants are convenient
    {
        if (c != 0) t_[Monomial{}] = c;
    }
    static MultiPoly variable(const std::string& name)
    {
        MultiPoly p;
        p.t_[Monomial{{name, 1}}] = 1;
        return p;
    }
    static MultiPoly term(const Rational& c, Monomial m)
    {
        MultiPoly p;
        for (auto it = m.begin(); it != m.end();)
            it = it->second == 0 ? m.erase(it) : std::next(it);
        if (c != 0) p.t_[std::move(m)] = c;
        return p;
    }

    const Terms& terms() const { return t_; }
    bool is_zero() const { return t_.empty(); }

    std::set<std::string> variables() const
    {
        std::set<std::string> out;
        for (const auto& [m, c] : t_)
            for (const auto& [v, e] : m) out.insert(v);
        return out;
    }

    Rational constant_term() const
    {
        auto it = t_.find(Monomial{});
        return it == t_.end() ? Rational(0) : it->second;
    }

    MultiPoly operator+(const MultiPoly& o) const
    {
        MultiPoly r = *this;
        for (const auto& [m, c] : o.t_) r.add_term(m, c);
        return r;
    }
    MultiPoly operator-() const
    {
        MultiPoly r = *this;
        for (auto& [m, c] : r.t_) c = -c;
        return r;
    }
    MultiPoly operator-(const MultiPoly& o) const { return *this + (-o); }
    MultiPoly operator*(const MultiPoly& o) const
    {
        MultiPoly r;
        for (const auto& [m1, c1] : t_)
            for (const auto& [m2, c2] : o.t_) {
                Monomial m = m1;
                for (const auto& [v, e] : m2) m[v] += e;
                r.add_term(m, c1 * c2);
            }
        return r;
    }
    MultiPoly& operator+=(const MultiPoly& o) { return *this = *this + o; }
    MultiPoly& operator*=(const MultiPoly& o) { return *this = *this * o; }
    bool operator==(const MultiPoly& o) const { return t_ == o.t_; }
    bool operator!=(const MultiPoly& o) const { return !(*this == o); }

    Rational eval(const std::map<std::string, Rational>& at) const
    {
        Rational acc = 0;
        for (const auto& [m, c] : t_) {
            Rational v = c;
            for (const auto& [name, e] : m) {
                auto it = at.find(name);
                if (it == at.end()) throw std::invalid_argument("missing value for variable " + name);
                for (unsigned k = 0; k < e; ++k) v *= it->second;
            }
            acc += v;
        }
        return acc;
    }

    // Substitute values for some variables, leaving the rest symbolic.
    MultiPoly substitute(const std::map<std::string, Rational>& at) const
    {
        MultiPoly r;
        for (const auto& [m, c] : t_) {
            Rational v = c;
            Monomial rest;
            for (const auto& [name, e] : m) {
                auto it = at.find(name);
                if (it == at.end()) {
                    rest[name] = e;
                    continue;
                }
                for (unsigned k = 0; k < e; ++k) v *= it->second;
            }
            r.add_term(rest, v);
        }
        return r;
    }

    // Terms in decreasing grlex order.
    std::vector<std::pair<Monomial, Rational>> sorted_terms() const
    {
        std::vector<std::pair<Monomial, Rational>> v(t_.begin(), t_.end());
        std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return grlex_greater(a.first, b.first); });
        return v;
    }

    std::string str() const
    {
        if (t_.empty()) return "0";
        std::string out;
        bool first = true;
        for (const auto& [m, c0] : sorted_terms()) {
            Rational c = c0;
            const bool neg = c < 0;
            if (neg) c = -c;
            out += first ? (neg ? "-" : "") : (neg ? " - " : " + ");
            first = false;
            if (m.empty())
                out += to_string(c);
            else if (c == 1)
                out += monomial_str(m);
            else
                out += to_string(c) + "*" + monomial_str(m);
        }
        return out;
    }

private:
    void add_term(const Monomial& m, const Rational& c)
    {
        if (c == 0) return;
        auto it = t_.find(m);
        if (it == t_.end()) {
            t_.emplace(m, c);
            return;
        }
        it->second += c;
        if (it->second == 0) t_.erase(it);
    }
    Terms t_;
};

inline Rational multi_eval(const MultiPoly& p, const std::map<std::string, Rational>& at) { return p.eval(at); }

struct ContentSplit {
    Monomial content;
    MultiPoly reduced;
};

// p = content * reduced with content the gcd monomial of p's terms in `vars`.
inline ContentSplit monomial_content_split(const MultiPoly& p, const std::set<std::string>& vars)
{
    if (p.is_zero()) throw std::domain_error("monomial content of the zero polynomial");
    Monomial g;
    bool first = true;
    for (const auto& [m, c] : p.terms()) {
        Monomial restricted;
        for (const auto& [v, e] : m)
            if (vars.count(v)) restricted[v] = e;
        if (first) {
            g = restricted;
            first = false;
            continue;
        }
        for (auto it = g.begin(); it != g.end();) {
            auto f = restricted.find(it->first);
            if (f == restricted.end()) {
                it = g.erase(it);
                continue;
            }
            it->second = std::min(it->second, f->second);
            ++it;
        }
    }
    MultiPoly reduced;
    for (const auto& [m, c] : p.terms()) {
        Monomial q = m;
        for (const auto& [v, e] : g) q[v] -= e;
        reduced += MultiPoly::term(c, q);
    }
    return {g, reduced};
}

inline nlohmann::json to_json(const MultiPoly& p)
{
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [m, c] : p.sorted_terms()) {
        nlohmann::json mono = nlohmann::json::object();
        for (const auto& [v, e] : m) mono[v] = e;
        arr.push_back({{"coeff", to_string(c)}, {"monomial", mono}});
    }
    return arr;
}

inline MultiPoly multi_poly_from_json(const nlohmann::json& j)
{
    MultiPoly p;
    for (const auto& t : j) {
        Monomial m;
        for (const auto& [v, e] : t.at("monomial").items()) m[v] = e.get<unsigned>();
        p += MultiPoly::term(parse_rational(t.at("coeff").get<std::string>()), m);
    }
    return p;
}

}  // namespace mlines
