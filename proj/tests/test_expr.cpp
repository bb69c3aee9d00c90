#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "crres/expr.hpp"
#include "crres/simplify.hpp"

using namespace crres;

namespace {

CoordsPtr plane() {
    auto c = std::make_shared<Coordinates>(std::vector<std::string>{"x1", "x2"});
    c->add_complex_alias("z", 0, 1);
    return c;
}

bool exactly_zero(const ScalarExpr& e) {
    return is_zero(e).verdict == Verdict::ExactZero;
}

/// Random polynomial in the chart coordinates with small integer
/// coefficients, degree <= 2 per monomial factor.
ScalarExpr random_poly(const CoordsPtr& C, std::mt19937& rng) {
    std::uniform_int_distribution<int> coeff(-3, 3);
    std::uniform_int_distribution<int> expo(0, 2);
    ScalarExpr acc = ScalarExpr::integer(0, C);
    for (int t = 0; t < 4; ++t) {
        int a = coeff(rng);
        int b = coeff(rng);
        ScalarExpr term = ScalarExpr::constant(CRat(Rat(a), Rat(b)), C);
        for (int i = 0; i < C->dim(); ++i)
            term = term * ScalarExpr::coordinate(i, C).pow(expo(rng));
        acc = acc + term;
    }
    return acc;
}

} // namespace

TEST_CASE("parse round trip and literal evaluation") {
    CoordsPtr C = plane();
    SUBCASE("z + conj(z) = 2 Re z") {
        ScalarExpr e = parse_expr("z + conj(z)", C);
        ScalarExpr expected = parse_expr("2*x1", C);
        CHECK(exactly_zero(e - expected));
    }
    SUBCASE("annihilator") {
        ScalarExpr e = parse_expr("0 * exp(x1)", C);
        CHECK(simplify(e).is_literal_zero());
    }
    SUBCASE("x1^2 * i at (2, 0)") {
        auto v = parse_expr("x1^2 * i", C).evaluate({2.0, 0.0});
        CHECK(v.real() == doctest::Approx(0.0));
        CHECK(v.imag() == doctest::Approx(4.0));
    }
    SUBCASE("print then parse is identity") {
        std::mt19937 rng(7);
        for (int t = 0; t < 20; ++t) {
            ScalarExpr e = simplify(random_poly(C, rng));
            ScalarExpr back = parse_expr(e.to_string(), C);
            CHECK(exactly_zero(e - back));
        }
    }
    SUBCASE("syntax errors carry a position") {
        CHECK_THROWS_AS(parse_expr("x1 + ", C), ParseError);
        CHECK_THROWS_AS(parse_expr("bogus_name", C), ParseError);
    }
    SUBCASE("rational and decimal literals agree") {
        CHECK(exactly_zero(parse_expr("0.5 - 1/2", C)));
    }
}

TEST_CASE("partial derivatives") {
    CoordsPtr C = plane();
    SUBCASE("polynomial rule") {
        ScalarExpr e = parse_expr("x1^2 * x2", C).partial("x1");
        CHECK(exactly_zero(e - parse_expr("2*x1*x2", C)));
    }
    SUBCASE("exp") {
        ScalarExpr e = parse_expr("exp(x1)", C);
        CHECK(exactly_zero(e.partial("x1") - e));
    }
    SUBCASE("conj is coordinatewise real linear") {
        ScalarExpr e = parse_expr("conj(x1 + i*x2)", C).partial("x2");
        CHECK(exactly_zero(e - parse_expr("-i", C)));
    }
    SUBCASE("constants differentiate to zero") {
        CHECK(simplify(parse_expr("3/7", C).partial("x1")).is_literal_zero());
        CHECK(simplify(ScalarExpr::pi(C).partial("x1")).is_literal_zero());
    }
    SUBCASE("unknown coordinate") {
        CHECK_THROWS(parse_expr("x1", C).partial("nope"));
    }
}

TEST_CASE("zero testing") {
    CoordsPtr C = plane();
    SUBCASE("commutator is exactly zero") {
        auto z = is_zero(parse_expr("x1*x2 - x2*x1", C));
        CHECK(z.verdict == Verdict::ExactZero);
    }
    SUBCASE("exp identity is probabilistic") {
        auto z = is_zero(parse_expr("exp(x1)*exp(-x1) - 1", C));
        CHECK(z.verdict == Verdict::ProbablyZero);
        CHECK(z.zero());
        CHECK(!z.exact());
    }
    SUBCASE("distinct coordinates differ exactly") {
        auto z = is_zero(parse_expr("x1 - x2", C));
        CHECK(z.verdict == Verdict::ExactNonzero);
    }
    SUBCASE("quotient cancellation is exact") {
        auto z = is_zero(parse_expr("(x1^2 - 1)/(x1 - 1) - x1 - 1", C));
        CHECK(z.verdict == Verdict::ExactZero);
    }
    SUBCASE("cross-denominator cancellation is exact") {
        auto z = is_zero(
            parse_expr("1/(x1*(x1-1)) - 1/(x1-1) + 1/x1 - 1/(x1*(x1-1)*(x1+2)) + "
                       "1/((x1-1)*(x1+2)) - 1/(x1*(x1+2))",
                       C));
        CHECK(z.verdict == Verdict::ExactZero);
    }
    SUBCASE("division by zero at samples resamples") {
        auto z = is_zero(parse_expr("exp(x1)/x1 - exp(x1)/x1", C));
        CHECK(z.zero());
    }
}

TEST_CASE("evaluate") {
    CoordsPtr C = plane();
    CHECK(parse_expr("exp(0)", C).evaluate({0, 0}).real() == doctest::Approx(1.0));
    auto v = parse_expr("x1 + i*x2", C).evaluate({3, 4});
    CHECK(v.real() == doctest::Approx(3.0));
    CHECK(v.imag() == doctest::Approx(4.0));
    CHECK_THROWS_AS(parse_expr("1/x1", C).evaluate({0, 0}), EvalError);
}

TEST_CASE("algebraic properties, randomized") {
    CoordsPtr C = plane();
    std::mt19937 rng(41);
    std::uniform_int_distribution<int> coeff(-3, 3);
    for (int t = 0; t < 40; ++t) {
        ScalarExpr e1 = random_poly(C, rng);
        ScalarExpr e2 = random_poly(C, rng);
        ScalarExpr a = ScalarExpr::integer(coeff(rng), C);
        ScalarExpr b = ScalarExpr::integer(coeff(rng), C);

        // linearity
        CHECK(exactly_zero((a * e1 + b * e2).partial(0) -
                           (a * e1.partial(0) + b * e2.partial(0))));
        // product rule
        CHECK(exactly_zero((e1 * e2).partial(0) - e1 * e2.partial(0) -
                           e1.partial(0) * e2));
        // mixed partials commute
        CHECK(exactly_zero(e1.partial(0).partial(1) - e1.partial(1).partial(0)));
    }
}

TEST_CASE("simplify is idempotent and evaluation-preserving") {
    CoordsPtr C = plane();
    std::mt19937 rng(43);
    std::uniform_real_distribution<double> uni(0.2, 0.8);
    for (int t = 0; t < 25; ++t) {
        ScalarExpr raw = random_poly(C, rng);
        ScalarExpr mixed =
            raw + ScalarExpr::sin(random_poly(C, rng)) +
            random_poly(C, rng) / (ScalarExpr::integer(2, C) + raw * raw);
        ScalarExpr s1 = simplify(mixed);
        ScalarExpr s2 = simplify(s1);
        CHECK(equal_nodes(s1.node(), s2.node()));

        std::vector<double> pt{uni(rng), uni(rng)};
        auto v1 = mixed.evaluate(pt);
        auto v2 = s1.evaluate(pt);
        CHECK(std::abs(v1 - v2) <=
              1e-12 * std::max(1.0, std::max(std::abs(v1), std::abs(v2))));
    }
}

TEST_CASE("truncated lattice sum has the right principal part") {
    auto c = std::make_shared<Coordinates>(std::vector<std::string>{"x1", "x2"});
    c->set_period(0, 1.0);
    c->set_period(1, 1.0);
    c->add_complex_alias("z", 0, 1);
    CoordsPtr C = c;
    ScalarExpr wp = weierstrass_p_trunc("z", 3.0, C);
    ScalarExpr z2 = parse_expr("z^2", C);
    // z^2 wp(z) - 1 vanishes at z = 0 to second order
    ScalarExpr g = simplify(z2 * wp - ScalarExpr::integer(1, C));
    auto v = g.evaluate({1e-5, 0.0});
    CHECK(std::abs(v) < 1e-9);
    // and d/dz of z^2 wp at 0 is 0 (no 1/z coefficient)
    ScalarExpr dz = simplify(z2 * wp).partial("x1");
    auto w = dz.evaluate({0.0, 0.0});
    CHECK(std::abs(w) < 1e-12);
}
