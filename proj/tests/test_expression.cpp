#include <doctest.h>

#include <cmath>
#include <vector>

#include "tscale/expression.hpp"

using namespace tscale;

namespace {

double eval1(const char* text, std::vector<double> x = {0.0}, double t = 0.0) {
    const ExpressionAst ast = parse_expression(text, static_cast<int>(x.size()));
    REQUIRE(ast.components.size() == 1);
    return ast.components[0].evaluate(x, t);
}

}  // namespace

TEST_CASE("precedence and associativity") {
    CHECK(eval1("1+2*3") == 7);
    CHECK(eval1("2^3^2") == 512);
    CHECK(eval1("-2^2") == -4);
    CHECK(eval1("(1+2)*3") == 9);
    CHECK(eval1("8/4/2") == 1);
    CHECK(eval1("1-2-3") == -4);
    CHECK(eval1("2e-1*10") == doctest::Approx(2.0));
}

TEST_CASE("variables and functions") {
    CHECK(eval1("x1*x2 + t", {2, 3}, 1) == 7);
    CHECK(eval1("sqrt(abs(x1))", {-4}) == 2);
    CHECK(eval1("exp(log(x1))", {3}) == doctest::Approx(3.0));
    CHECK(eval1("sin(t)^2 + cos(t)^2", {0}, 0.7) == doctest::Approx(1.0));
}

TEST_CASE("vector dynamics") {
    const ExpressionAst ast = parse_dynamics("x2, -x1", 2);
    REQUIRE(ast.components.size() == 2);
    const std::vector<double> x{1.0, 2.0};
    CHECK(ast.components[0].evaluate(x, 0) == 2);
    CHECK(ast.components[1].evaluate(x, 0) == -1);
}

TEST_CASE("syntax error column") {
    try {
        parse_expression("x1+", 1);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.kind() == ParseError::Kind::syntax);
        CHECK(e.column() == 4);
    }
}

TEST_CASE("identifier and arity errors") {
    try {
        parse_expression("x3", 2);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.kind() == ParseError::Kind::unknown_identifier);
        CHECK(e.column() == 1);
    }
    try {
        parse_dynamics("x1", 2);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.kind() == ParseError::Kind::arity_mismatch);
    }
    CHECK_THROWS_AS(parse_expression("foo(x1)", 1), ParseError);
    CHECK_THROWS_AS(parse_expression("(x1", 1), ParseError);
    CHECK_THROWS_AS(parse_expression("", 1), ParseError);
}

TEST_CASE("to_string round trip") {
    const ExpressionAst a = parse_expression("x1^2 - 3*t/(1+x1)", 1);
    const ExpressionAst b = parse_expression(a.components[0].to_string(), 1);
    for (double x : {-0.5, 0.0, 0.3, 2.0}) {
        const std::vector<double> v{x};
        CHECK(a.components[0].evaluate(v, 0.7) == b.components[0].evaluate(v, 0.7));
    }
}
