#include <catch2/catch_amalgamated.hpp>

#include "holo/expr.hpp"

using namespace holo;

TEST_CASE("expression parsing builds expected trees") {
    // hand-built reference for "2x + 1"
    Expr want = ex::add(ex::mul(ex::num(2), ex::sym("x")), ex::num(1));
    CHECK(expr_equal(parse_expr("2x+1"), want));
    CHECK(expr_equal(parse_expr("2 x + 1"), want));
    CHECK(expr_equal(parse_expr("2*x + 1"), want));

    Expr frac = ex::div(ex::sym("x"), ex::num(2));
    CHECK(expr_equal(parse_expr("x/2"), frac));

    CHECK(expr_equal(parse_expr("-(a + b)"),
                     ex::neg(ex::add(ex::sym("a"), ex::sym("b")))));
    CHECK(expr_equal(parse_expr("sin(30) * 2"),
                     ex::mul(ex::call("sin", {ex::num(30)}), ex::num(2))));
    CHECK(expr_equal(parse_expr("h^2"), ex::pow(ex::sym("h"), ex::num(2))));
}

TEST_CASE("parse errors carry position") {
    CHECK_THROWS_AS(parse_expr("2x +"), ParseError);
    CHECK_THROWS_AS(parse_expr("(a"), ParseError);
    CHECK_THROWS_AS(parse_expr(""), ParseError);
    try {
        parse_expr("a + %");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.pos() == 4);
    }
}

TEST_CASE("evaluation uses degrees and reports unknowns") {
    std::map<int, double> env;
    CHECK(eval_expr(parse_expr("sin(30)"), env).value() == Catch::Approx(0.5));
    CHECK(eval_expr(parse_expr("cos(60)"), env).value() == Catch::Approx(0.5));
    CHECK(eval_expr(parse_expr("tan(45)"), env).value() == Catch::Approx(1.0));
    CHECK(eval_expr(parse_expr("sqrt(2)^2"), env).value() == Catch::Approx(2.0));
    CHECK(eval_expr(parse_expr("pi"), env).value() == Catch::Approx(3.14159265358979));

    CHECK_FALSE(eval_expr(ex::var(7), env).has_value());
    env[7] = 2.5;
    CHECK(eval_expr(ex::var(7), env).value() == Catch::Approx(2.5));
    CHECK_FALSE(eval_expr(parse_expr("1/0"), env).has_value());
    CHECK_FALSE(eval_expr(parse_expr("sqrt(-1)"), env).has_value());
}

TEST_CASE("print/parse round trip") {
    const char* samples[] = {
        "2 * x + 1", "a - (b - c)", "(a + b) * c", "a / b / c",
        "sin(x + 45)", "sqrt(x) * y", "-(x) + 3", "x ^ 2 + y ^ 2", "2 ^ 3 ^ 2",
    };
    for (const char* s : samples) {
        Expr e = parse_expr(s);
        Expr round = parse_expr(to_string(e));
        INFO(s << " printed as " << to_string(e));
        CHECK(expr_equal(e, round));
    }
}

TEST_CASE("substitution and variable collection") {
    Expr e = ex::add(ex::var(0), ex::mul(ex::var(1), ex::sym("pi")));
    CHECK(vars_of(e) == std::set<int>{0, 1});
    Expr sub = substitute(e, {{0, 2.0}});
    CHECK(vars_of(sub) == std::set<int>{1});
    CHECK(eval_expr(sub, std::map<int, double>{{1, 1.0}}).value() ==
          Catch::Approx(2.0 + 3.14159265358979));
}

TEST_CASE("linear form extraction") {
    // 2a - b/2 + 3 with a=$0, b=$1
    Expr e = ex::add(ex::sub(ex::mul(ex::num(2), ex::var(0)),
                             ex::div(ex::var(1), ex::num(2))),
                     ex::num(3));
    auto f = linear_form(e);
    REQUIRE(f.has_value());
    CHECK(f->coeff.at(0) == Catch::Approx(2.0));
    CHECK(f->coeff.at(1) == Catch::Approx(-0.5));
    CHECK(f->constant == Catch::Approx(3.0));

    CHECK(linear_form(ex::mul(ex::var(0), ex::var(1))) == std::nullopt);
    CHECK(linear_form(ex::pow(ex::var(0), ex::num(2))) == std::nullopt);

    // sqrt(4) * v is linear: constant subtree folds
    auto g = linear_form(ex::mul(ex::call("sqrt", {ex::num(4)}), ex::var(2)));
    REQUIRE(g.has_value());
    CHECK(g->coeff.at(2) == Catch::Approx(2.0));
}

TEST_CASE("canonical keys identify equivalent forms") {
    CHECK(normal_key(parse_expr("a + b")) == normal_key(parse_expr("b + a")));
    CHECK(normal_key(parse_expr("2 * 3")) == normal_key(parse_expr("6")));
    CHECK(normal_key(parse_expr("a * (b + c)")) == normal_key(parse_expr("(c + b) * a")));
    CHECK(normal_key(parse_expr("a - b")) != normal_key(parse_expr("a + b")));
}

TEST_CASE("comparison parsing") {
    Comparison c = parse_comparison("x + 1 <= 2 y");
    CHECK(c.op == CmpOp::Le);
    CHECK(expr_equal(c.lhs, parse_expr("x + 1")));
    CHECK(expr_equal(c.rhs, parse_expr("2y")));
    CHECK(parse_comparison("a = b").op == CmpOp::Eq);
    CHECK(parse_comparison("a != b").op == CmpOp::Ne);
    CHECK(parse_comparison("a < b").op == CmpOp::Lt);
    CHECK_THROWS_AS(parse_comparison("a b"), ParseError);
}
