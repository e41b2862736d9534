#pragma once

// Formal-language literals for problem text and diagram annotations, e.g.
//   Triangle(A, B, C)
//   PointLiesOnLine(A, Line(B, C))
//   Equals(LengthOf(Line(A, B)), 2x + 1)
//   Find(MeasureOf(Angle(2)))
//
// A literal is an expression tree whose root is a predicate application.
// Identifiers that are not declared predicates parse as symbolic variables
// (single uppercase letters conventionally name points, lowercase ones name
// unknowns; the distinction is made by the hologram builder, not here).
//
// The predicate inventory below is an engineering superset of the usual
// formal-language annotation style for plane-geometry problems; the exact
// list is documented in docs/formats.md.

#include <array>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "holo/error.hpp"
#include "holo/expr.hpp"

namespace holo {

struct PredicateSig {
    int min_args;
    int max_args;
};

inline const std::map<std::string, PredicateSig>& predicate_table() {
    static const std::map<std::string, PredicateSig> table = {
        // primitives
        {"Point", {1, 1}},
        {"Line", {2, 2}},
        {"Angle", {1, 3}},  // Angle(label) | Angle(P) | Angle(A,B,C)
        {"Arc", {2, 3}},
        {"Circle", {1, 2}},
        {"Triangle", {3, 3}},
        {"Quadrilateral", {4, 4}},
        {"Parallelogram", {4, 4}},
        {"Rectangle", {4, 4}},
        {"Square", {4, 4}},
        {"Rhombus", {4, 4}},
        {"Trapezoid", {4, 4}},
        {"Kite", {4, 4}},
        {"Pentagon", {5, 5}},
        {"Hexagon", {6, 6}},
        {"Polygon", {3, 12}},
        // relations
        {"PointLiesOnLine", {2, 2}},
        {"PointLiesOnCircle", {2, 2}},
        {"Parallel", {2, 2}},
        {"Perpendicular", {2, 2}},
        {"IntersectAt", {2, 4}},
        {"BisectsAngle", {2, 2}},
        {"Tangent", {2, 2}},
        {"IsMidpointOf", {2, 2}},
        {"IsDiameterOf", {2, 2}},
        {"IsChordOf", {2, 2}},
        {"IsRadiusOf", {2, 2}},
        {"InscribedIn", {2, 2}},
        {"CircumscribedTo", {2, 2}},
        {"Similar", {2, 2}},
        {"Congruent", {2, 2}},
        {"Equilateral", {1, 1}},
        {"Isosceles", {1, 1}},
        {"Regular", {1, 1}},
        // measures and value functions
        {"LengthOf", {1, 1}},
        {"MeasureOf", {1, 1}},
        {"AreaOf", {1, 1}},
        {"PerimeterOf", {1, 1}},
        {"RadiusOf", {1, 1}},
        {"DiameterOf", {1, 1}},
        {"CircumferenceOf", {1, 1}},
        {"RatioOf", {2, 2}},
        {"Add", {2, 8}},
        {"Sub", {2, 2}},
        {"Mul", {2, 4}},
        {"Div", {2, 2}},
        {"Pow", {2, 2}},
        {"SqrtOf", {1, 1}},
        {"HalfOf", {1, 1}},
        {"SinOf", {1, 1}},
        {"CosOf", {1, 1}},
        {"TanOf", {1, 1}},
        // top level
        {"Equals", {2, 2}},
        {"Find", {1, 1}},
    };
    return table;
}

struct Literal {
    std::string predicate;
    std::vector<Expr> args;
    Expr term;  // full application expression

    bool operator==(const Literal& o) const { return expr_equal(term, o.term); }
};

namespace detail {

// Calls with a capitalized unknown name are almost certainly misspelled
// predicates; lowercase calls are the DSL's own functions (sin, sqrt, ...).
inline void validate_literal_calls(const Expr& e, const std::string& source) {
    if (e->op == ExprOp::Call) {
        auto it = predicate_table().find(e->sym);
        if (it == predicate_table().end()) {
            static const std::array<const char*, 5> dsl_fns = {"sin", "cos", "tan", "sqrt",
                                                               "abs"};
            bool dsl = false;
            for (const char* f : dsl_fns) dsl = dsl || e->sym == f;
            if (!dsl) {
                throw ValidationError({"unknown predicate '" + e->sym + "' in: " + source});
            }
        } else if ((int)e->args.size() < it->second.min_args ||
                   (int)e->args.size() > it->second.max_args) {
            throw ValidationError({"predicate '" + e->sym + "' applied to " +
                                   std::to_string(e->args.size()) + " argument(s) in: " +
                                   source});
        }
    }
    for (const auto& a : e->args) validate_literal_calls(a, source);
}

}  // namespace detail

inline Literal parse_literal(const std::string& s) {
    if (s.empty()) throw ParseError(0, "empty literal");
    Expr e = parse_expr(s);
    if (e->op != ExprOp::Call) {
        throw ValidationError({"literal is not a predicate application: " + s});
    }
    detail::validate_literal_calls(e, s);
    Literal l;
    l.predicate = e->sym;
    l.args = e->args;
    l.term = e;
    return l;
}

inline std::string print_literal(const Literal& l) { return to_string(l.term); }

// ---------------------------------------------------------------------------
// Problem input
// ---------------------------------------------------------------------------

struct ProblemInput {
    std::string id;
    std::string type;  // optional problem-type tag (Line, Triangle, Quad, Circle, Other)
    std::vector<Literal> text_literals;
    std::vector<Literal> diagram_literals;
    std::map<std::string, std::pair<double, double>> point_coords;
    std::array<double, 4> choices{};
    std::optional<int> answer_index;
};

inline ProblemInput problem_from_json(const nlohmann::json& j) {
    ProblemInput p;
    std::vector<std::string> issues;

    if (j.contains("id")) p.id = j.at("id").get<std::string>();
    if (j.contains("type")) p.type = j.at("type").get<std::string>();

    auto parse_list = [&](const char* field, std::vector<Literal>& out) {
        if (!j.contains(field)) {
            issues.push_back(std::string("missing field '") + field + "'");
            return;
        }
        for (const auto& js : j.at(field)) {
            const std::string s = js.get<std::string>();
            try {
                out.push_back(parse_literal(s));
            } catch (const Error& e) {
                issues.push_back(std::string(field) + ": " + e.what());
            }
        }
    };
    parse_list("text_literals", p.text_literals);
    parse_list("diagram_literals", p.diagram_literals);

    if (j.contains("point_coords")) {
        for (const auto& [name, xy] : j.at("point_coords").items()) {
            if (!xy.is_array() || xy.size() != 2 || !xy.at(0).is_number() ||
                !xy.at(1).is_number()) {
                issues.push_back("point_coords." + name + " is not a [x, y] pair");
                continue;
            }
            double x = xy.at(0).get<double>();
            double y = xy.at(1).get<double>();
            if (!std::isfinite(x) || !std::isfinite(y)) {
                issues.push_back("point_coords." + name + " is not finite");
                continue;
            }
            p.point_coords[name] = {x, y};
        }
    }

    if (!j.contains("choices") || !j.at("choices").is_array() || j.at("choices").size() != 4) {
        issues.push_back("missing or malformed 'choices' (expected 4 numbers)");
    } else {
        for (int i = 0; i < 4; ++i) p.choices[i] = j.at("choices").at(i).get<double>();
    }

    if (j.contains("answer_index")) {
        int a = j.at("answer_index").get<int>();
        if (a < 0 || a > 3) {
            issues.push_back("answer_index out of range");
        } else {
            p.answer_index = a;
        }
    }

    int goal_count = 0;
    for (const auto& l : p.text_literals) {
        if (l.predicate == "Find") ++goal_count;
    }
    for (const auto& l : p.diagram_literals) {
        if (l.predicate == "Find") {
            issues.push_back("goal literal Find(...) must appear in text_literals");
        }
    }
    if (goal_count != 1) {
        issues.push_back("expected exactly one Find(...) literal, got " +
                         std::to_string(goal_count));
    }

    if (!issues.empty()) throw ValidationError(std::move(issues));
    return p;
}

inline ProblemInput load_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open problem file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw IoError("malformed JSON in " + path + ": " + e.what());
    }
    try {
        return problem_from_json(j);
    } catch (const ValidationError& e) {
        std::vector<std::string> issues = e.issues();
        issues.insert(issues.begin(), "in " + path);
        throw ValidationError(std::move(issues));
    }
}

}  // namespace holo
