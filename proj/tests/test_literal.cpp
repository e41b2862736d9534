#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <random>

#include "holo/literal.hpp"

using namespace holo;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    std::string path = std::string(HOLO_TEST_TMP) + "_" + name;
    std::ofstream out(path);
    out << content;
    return path;
}

}  // namespace

TEST_CASE("literals parse into predicate applications") {
    Literal l = parse_literal("PointLiesOnLine(A, Line(B, C))");
    CHECK(l.predicate == "PointLiesOnLine");
    REQUIRE(l.args.size() == 2);
    CHECK(l.args[0]->op == ExprOp::Sym);
    CHECK(l.args[0]->sym == "A");
    CHECK(l.args[1]->op == ExprOp::Call);
    CHECK(l.args[1]->sym == "Line");

    Literal t = parse_literal("Triangle(A, B, C)");
    CHECK(t.predicate == "Triangle");
    REQUIRE(t.args.size() == 3);
    for (const auto& a : t.args) CHECK(a->op == ExprOp::Sym);
}

TEST_CASE("expression arguments parse against a hand-built tree") {
    Literal l = parse_literal("Equals(LengthOf(Line(A,B)), 2x+1)");
    REQUIRE(l.args.size() == 2);
    Expr want = ex::add(ex::mul(ex::num(2), ex::sym("x")), ex::num(1));
    CHECK(expr_equal(l.args[1], want));
    Expr len = ex::call("LengthOf", {ex::call("Line", {ex::sym("A"), ex::sym("B")})});
    CHECK(expr_equal(l.args[0], len));
}

TEST_CASE("unknown predicates and bad arity are rejected") {
    CHECK_THROWS_AS(parse_literal("Frobnicate(A, B)"), ValidationError);
    CHECK_THROWS_AS(parse_literal("Triangle(A, B)"), ValidationError);
    CHECK_THROWS_AS(parse_literal("Line(A, B, C)"), ValidationError);
    CHECK_THROWS_AS(parse_literal("x + 1"), ValidationError);  // not an application
    CHECK_THROWS_AS(parse_literal("Triangle(A, B,"), ParseError);
    CHECK_THROWS_AS(parse_literal(""), ParseError);
}

TEST_CASE("print/parse round trip on a corpus of literals") {
    const char* samples[] = {
        "Triangle(A, B, C)",
        "PointLiesOnLine(D, Line(A, C))",
        "Equals(LengthOf(Line(A, B)), 2 * x + 1)",
        "Equals(MeasureOf(Angle(A, B, C)), MeasureOf(Angle(2)))",
        "Find(RatioOf(AreaOf(Triangle(A, B, C)), AreaOf(Triangle(D, E, F))))",
        "Parallel(Line(A, B), Line(C, D))",
        "Equals(RadiusOf(Circle(O)), 5)",
        "Find(x)",
    };
    for (const char* s : samples) {
        Literal l = parse_literal(s);
        CHECK(parse_literal(print_literal(l)) == l);
    }
}

TEST_CASE("mutated literals keep failing arity validation") {
    // drop or duplicate arguments of valid literals; parser must reject those
    // whose arity leaves the declared range
    std::mt19937 rng(99);
    const char* bases[] = {"Triangle(A, B, C)", "Line(A, B)", "Tangent(Line(A,B), Circle(O))"};
    for (const char* base : bases) {
        Literal l = parse_literal(base);
        std::string shrunk = l.predicate + "(";
        for (std::size_t i = 0; i + 1 < l.args.size(); ++i) {
            if (i) shrunk += ", ";
            shrunk += to_string(l.args[i]);
        }
        shrunk += ")";
        CHECK_THROWS_AS(parse_literal(shrunk), ValidationError);

        std::string grown = base;
        grown.insert(grown.size() - 1, ", Z, Z, Z, Z, Z, Z, Z, Z, Z, Z, Z");
        CHECK_THROWS_AS(parse_literal(grown), ValidationError);
        (void)rng;
    }
}

TEST_CASE("problem files load with all fields") {
    std::string path = write_temp("ok.json", R"json({
      "id": "demo-1",
      "type": "Triangle",
      "text_literals": [
        "Equals(MeasureOf(Angle(A, B, C)), 70)",
        "Equals(MeasureOf(Angle(B, C, A)), 60)",
        "Find(MeasureOf(Angle(C, A, B)))"
      ],
      "diagram_literals": [
        "Triangle(A, B, C)",
        "PointLiesOnLine(D, Line(A, C))",
        "Line(B, D)",
        "Equals(LengthOf(Line(A, D)), 3)",
        "Equals(LengthOf(Line(D, C)), 5)"
      ],
      "point_coords": {"A": [0, 0], "B": [4, 3], "C": [8, 0], "D": [4, 0]},
      "choices": [40, 50, 60, 70],
      "answer_index": 1
    })json");
    ProblemInput p = load_problem(path);
    CHECK(p.id == "demo-1");
    CHECK(p.text_literals.size() == 3);
    CHECK(p.diagram_literals.size() == 5);
    CHECK(p.point_coords.size() == 4);
    CHECK(p.choices[1] == 50);
    CHECK(p.answer_index.value() == 1);
    std::remove(path.c_str());
}

TEST_CASE("problem files without choices fail validation") {
    std::string path = write_temp("nochoices.json", R"json({
      "id": "bad-1",
      "text_literals": ["Find(x)"],
      "diagram_literals": []
    })json");
    CHECK_THROWS_AS(load_problem(path), ValidationError);
    std::remove(path.c_str());
}

TEST_CASE("every offending literal is listed") {
    std::string path = write_temp("multi.json", R"json({
      "id": "bad-2",
      "text_literals": ["Frobnicate(A)", "Triangle(A)", "Find(x)"],
      "diagram_literals": ["AlsoBad(Q)"],
      "choices": [1, 2, 3, 4]
    })json");
    try {
        load_problem(path);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        int bad = 0;
        for (const auto& issue : e.issues()) {
            if (issue.find("Frobnicate") != std::string::npos) ++bad;
            if (issue.find("Triangle") != std::string::npos) ++bad;
            if (issue.find("AlsoBad") != std::string::npos) ++bad;
        }
        CHECK(bad == 3);
    }
    std::remove(path.c_str());
}

TEST_CASE("goal may reference a numeric diagram angle label") {
    std::string path = write_temp("label.json", R"json({
      "id": "label-1",
      "text_literals": ["Find(MeasureOf(Angle(2)))"],
      "diagram_literals": ["Equals(MeasureOf(Angle(2)), MeasureOf(Angle(A, B, C)))"],
      "choices": [10, 20, 30, 40]
    })json");
    ProblemInput p = load_problem(path);
    const Literal& find = p.text_literals[0];
    CHECK(find.predicate == "Find");
    const Expr& angle = find.args[0]->args[0];
    CHECK(angle->sym == "Angle");
    CHECK(angle->args[0]->op == ExprOp::Num);
    CHECK(angle->args[0]->num == 2.0);
    std::remove(path.c_str());
}

TEST_CASE("exactly one goal literal is required") {
    std::string none = write_temp("nogoal.json", R"json({
      "id": "g0", "text_literals": [], "diagram_literals": [], "choices": [1,2,3,4]
    })json");
    CHECK_THROWS_AS(load_problem(none), ValidationError);
    std::string two = write_temp("twogoals.json", R"json({
      "id": "g2", "text_literals": ["Find(x)", "Find(y)"], "diagram_literals": [],
      "choices": [1,2,3,4]
    })json");
    CHECK_THROWS_AS(load_problem(two), ValidationError);
    std::remove(none.c_str());
    std::remove(two.c_str());
}
