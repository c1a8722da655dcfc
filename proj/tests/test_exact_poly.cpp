#include "support.hpp"

#include <gtest/gtest.h>

using namespace mlines;
using mlines::test::even_poly;

namespace {

UniPoly quad(int k) { return UniPoly(std::vector<Int>{-k, 0, 1}); }

}  // namespace

TEST(UniPoly, Arithmetic)
{
    EXPECT_EQ(uni_arith(quad(2), quad(3), ArithOp::mul), UniPoly(std::vector<Int>{6, 0, -5, 0, 1}));
    EXPECT_EQ(uni_arith(even_poly({1, 1}), quad(1), ArithOp::add), UniPoly(std::vector<Int>{0, 0, 2}));
    EXPECT_EQ(uni_arith(quad(5), UniPoly::constant(1), ArithOp::mul), quad(5));
    EXPECT_TRUE(uni_arith(quad(5), quad(5), ArithOp::sub).is_zero());
}

TEST(UniPoly, PrintsHighestDegreeFirst)
{
    EXPECT_EQ(even_poly({1, 4, 1}).str(), "x^4 + 4x^2 + 1");
    EXPECT_EQ(quad(2).str(), "x^2 - 2");
    EXPECT_EQ(UniPoly().str(), "0");
    EXPECT_EQ(UniPoly(std::vector<Int>{0, -1}).str(), "-x");
}

TEST(UniPoly, HugeCoefficientsStayExact)
{
    UniPoly p = UniPoly::constant(1);
    for (int k = 0; k < 40; ++k) p *= quad(1000 + k);
    Int prod = 1;
    for (int k = 0; k < 40; ++k) prod *= 1000 + k;
    EXPECT_EQ(p.coeff(0), prod);  // 40 negative factors
    EXPECT_EQ(p.eval(Int(0)), prod);
}

TEST(UniPoly, JsonRoundTrip)
{
    const UniPoly p = even_poly({1, 4149, 42179, 81722});
    EXPECT_EQ(uni_poly_from_json(to_json(p)), p);
}

TEST(ConfigPoly, SmallCases)
{
    EXPECT_EQ(config_poly(2, 0), UniPoly(std::vector<Int>{0, 0, -1, 0, 1}));
    EXPECT_EQ(config_poly(0, 7), UniPoly::constant(1));
    EXPECT_EQ(config_poly(3, 2), quad(2) * quad(3) * quad(4));
    EXPECT_EQ(quotient_config_poly(3), quad(2));
    EXPECT_EQ(quotient_config_poly(2), UniPoly::constant(1));
    EXPECT_EQ(quotient_config_poly(1), UniPoly::constant(1));
}

// Adding points one at a time: F_{l+1}(C minus k) fibres over F_l(C minus k)
// with fibre C minus (k + l) points.
TEST(ConfigPoly, FibrationRecurrence)
{
    for (unsigned k = 0; k < 5; ++k)
        for (unsigned l = 0; l < 6; ++l) EXPECT_EQ(config_poly(l + 1, k), config_poly(l, k) * quad(static_cast<int>(k + l)));
}

// F_m(C) = Aff(C) x (F_m(C) / Aff(C)) for m >= 2, and Aff(C) has polynomial x^2 (x^2 - 1).
TEST(ConfigPoly, QuotientByAffineGroup)
{
    const UniPoly aff = UniPoly(std::vector<Int>{0, 0, 1}) * quad(1);
    for (unsigned m = 2; m < 9; ++m) EXPECT_EQ(config_poly(m, 0), aff * quotient_config_poly(m));
}

TEST(MultiPoly, Evaluate)
{
    const MultiPoly b1 = MultiPoly::variable("b1"), b2 = MultiPoly::variable("b2");
    EXPECT_EQ(multi_eval(b1 * b2 + Rational(1), {{"b1", 2}, {"b2", 3}}), Rational(7));
    EXPECT_EQ(multi_eval(MultiPoly(Rational(5, 3)), {}), Rational(5, 3));
    EXPECT_THROW(multi_eval(b1, {}), std::invalid_argument);
    const MultiPoly x = MultiPoly::variable("x");
    EXPECT_TRUE((x * b1).substitute({{"b1", 0}}).is_zero());
    EXPECT_EQ((x * b1 + Rational(4)).substitute({{"b1", 0}}), MultiPoly(Rational(4)));
}

TEST(MultiPoly, ContentSplit)
{
    const MultiPoly b1 = MultiPoly::variable("b1"), b2 = MultiPoly::variable("b2");
    const auto s = monomial_content_split(b1 * b1 * b2 + b1 * b1 * b2 * b2, {"b1", "b2"});
    EXPECT_EQ(s.content, (Monomial{{"b1", 2}, {"b2", 1}}));
    EXPECT_EQ(s.reduced, MultiPoly(Rational(1)) + b2);
    const auto t = monomial_content_split(b1 + b2, {"b1", "b2"});
    EXPECT_TRUE(t.content.empty());
    EXPECT_EQ(t.reduced, b1 + b2);
    const MultiPoly x = MultiPoly::variable("x"), y = MultiPoly::variable("y");
    const auto u = monomial_content_split(x * b1 + y * b1, {"b1"});
    EXPECT_EQ(u.content, (Monomial{{"b1", 1}}));
    EXPECT_EQ(MultiPoly::term(1, u.content) * u.reduced, x * b1 + y * b1);
}

TEST(MultiPoly, ContentSplitReexpandsRandomPolynomials)
{
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> e(0, 3), c(-5, 5);
    const std::vector<std::string> names = {"b1", "b2", "x"};
    for (int trial = 0; trial < 200; ++trial) {
        MultiPoly p;
        for (int k = 0; k < 4; ++k) {
            Monomial m;
            for (const auto& n : names) m[n] = static_cast<unsigned>(e(rng));
            p += MultiPoly::term(c(rng), m);
        }
        if (p.is_zero()) continue;
        const auto s = monomial_content_split(p, {"b1", "b2"});
        EXPECT_EQ(MultiPoly::term(1, s.content) * s.reduced, p);
        // the reduced part has no common b-factor left
        const auto again = monomial_content_split(s.reduced, {"b1", "b2"});
        EXPECT_TRUE(again.content.empty());
    }
}

TEST(MultiPoly, JsonRoundTrip)
{
    const MultiPoly p = MultiPoly::variable("b[1,2]") * MultiPoly::variable("x[1|2]") + Rational(-3, 7);
    EXPECT_EQ(multi_poly_from_json(to_json(p)), p);
}

TEST(Rationals, ParseAndPrint)
{
    EXPECT_EQ(parse_rational("-6/4"), Rational(-3, 2));
    EXPECT_EQ(to_string(Rational(-3, 2)), "-3/2");
    EXPECT_EQ(to_string(Rational(4)), "4");
    EXPECT_ANY_THROW(parse_rational("1/0"));
}
