#pragma once

// Declarative graph models. Each model encodes one geometric theorem or
// property as data: a small attribute-free pattern graph, a relation sentence
// template, tolerance-gated visual constraints, and either mathematical
// constraints plus graph-expansion actions (proving models) or equation
// templates (property models). Models live in a JSON pool file so new
// theorems can be added without touching code.

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "holo/attrs.hpp"
#include "holo/error.hpp"
#include "holo/expr.hpp"
#include "holo/hologram.hpp"

namespace holo {

struct PatternVertex {
    std::string placeholder;
    VertexKind kind;
};

struct PatternEdge {
    std::string u;
    std::string v;
    EdgeKind kind;
};

struct PatternHologram {
    std::vector<PatternVertex> vertices;
    std::vector<PatternEdge> edges;

    int index_of(const std::string& placeholder) const {
        for (std::size_t i = 0; i < vertices.size(); ++i) {
            if (vertices[i].placeholder == placeholder) return (int)i;
        }
        return -1;
    }
};

// A comparison over placeholder attribute references. Math constraints are
// exact (equality means |lhs - rhs| <= 1e-6); visual constraints carry their
// own tolerance, absolute for angles and relative for lengths.
struct ConstraintExpr {
    Comparison cmp;
    std::string source;
    double tolerance = 1e-6;
    bool relative = false;
};

constexpr double kMathConstraintTol = 1e-6;
constexpr double kDefaultAngleTolDeg = 5.0;
constexpr double kDefaultLengthRelTol = 0.08;

struct ExpansionOp {
    enum Kind { AddEdge, AddVertex, SetAttr };

    Kind kind = AddEdge;
    // AddEdge
    std::string u, v;
    EdgeKind edge = EdgeKind::Parallel;
    // AddVertex
    std::string placeholder;
    VertexKind vertex_kind;
    std::vector<PatternEdge> attach;
    // SetAttr
    std::string target;
    std::string slot_fn;  // length / measure / area / radius / perimeter
    Expr value;           // over placeholder refs and constants
    std::string value_source;
};

struct EquationTemplate {
    Expr lhs;
    Expr rhs;
    std::string source;
};

struct GraphModel {
    enum Kind { Proving, Property };

    std::string name;
    Kind kind = Property;
    PatternHologram pattern;
    std::string relation_template;
    std::vector<ConstraintExpr> visual_constraints;
    std::vector<ConstraintExpr> math_constraints;  // proving only
    std::vector<ExpansionOp> expansions;           // proving only
    std::vector<EquationTemplate> equations;       // property only
};

struct ModelDiagnostic {
    std::string code;
    std::string detail;
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace detail {

// Collects attribute references fn(placeholder) from a constraint/template
// expression; anything else that names a symbol is reported through `bad`.
inline void collect_refs(const Expr& e, std::vector<std::pair<std::string, std::string>>& refs,
                         std::vector<std::string>& bad) {
    if (e->op == ExprOp::Call) {
        if (is_attr_ref_fn(e->sym)) {
            if (e->args.size() == 1 && e->args[0]->op == ExprOp::Sym) {
                refs.push_back({e->sym, e->args[0]->sym});
            } else {
                bad.push_back(to_string(e));
            }
            return;
        }
        if (e->sym == "dirdiff") {
            if (e->args.size() == 2 && e->args[0]->op == ExprOp::Sym &&
                e->args[1]->op == ExprOp::Sym) {
                refs.push_back({"dirdiff", e->args[0]->sym});
                refs.push_back({"dirdiff", e->args[1]->sym});
            } else {
                bad.push_back(to_string(e));
            }
            return;
        }
    }
    if (e->op == ExprOp::Sym && e->sym != "pi") {
        bad.push_back(e->sym);
        return;
    }
    for (const auto& a : e->args) collect_refs(a, refs, bad);
}

}  // namespace detail

inline std::vector<ModelDiagnostic> validate_model(const GraphModel& m) {
    std::vector<ModelDiagnostic> out;
    auto diag = [&](std::string code, std::string detail) {
        out.push_back({std::move(code), std::move(detail)});
    };

    // pattern basics
    if (m.pattern.vertices.empty()) diag("empty-pattern", m.name);
    if (m.pattern.vertices.size() > 20) {
        diag("pattern-too-large", std::to_string(m.pattern.vertices.size()) + " vertices");
    }
    std::set<std::string> names;
    for (const auto& v : m.pattern.vertices) {
        if (!names.insert(v.placeholder).second) {
            diag("duplicate-placeholder", v.placeholder);
        }
    }
    auto declared = [&](const std::string& p) { return names.count(p) > 0; };
    for (const auto& e : m.pattern.edges) {
        if (!declared(e.u)) diag("unknown-placeholder", e.u + " in pattern edge");
        if (!declared(e.v)) diag("unknown-placeholder", e.v + " in pattern edge");
        if (e.u == e.v) diag("self-loop", e.u);
    }

    // connectivity (all edge kinds alike)
    if (!m.pattern.vertices.empty()) {
        std::map<std::string, std::vector<std::string>> adj;
        for (const auto& e : m.pattern.edges) {
            adj[e.u].push_back(e.v);
            adj[e.v].push_back(e.u);
        }
        std::set<std::string> seen;
        std::vector<std::string> stack = {m.pattern.vertices[0].placeholder};
        while (!stack.empty()) {
            std::string v = stack.back();
            stack.pop_back();
            if (!seen.insert(v).second) continue;
            for (const auto& n : adj[v]) stack.push_back(n);
        }
        if (seen.size() != m.pattern.vertices.size()) {
            diag("disconnected-pattern", m.name);
        }
    }

    // kind-specific payload
    if (m.kind == GraphModel::Proving && m.expansions.empty()) {
        diag("missing-expansion", m.name);
    }
    if (m.kind == GraphModel::Property && m.equations.empty()) {
        diag("missing-equations", m.name);
    }
    if (m.kind == GraphModel::Proving && !m.equations.empty()) {
        diag("unexpected-equations", m.name);
    }
    if (m.kind == GraphModel::Property &&
        (!m.expansions.empty() || !m.math_constraints.empty())) {
        diag("unexpected-expansions", m.name);
    }

    // relation template holes
    const std::string& t = m.relation_template;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] != '{') continue;
        auto close = t.find('}', i);
        if (close == std::string::npos) {
            diag("unterminated-hole", t.substr(i));
            break;
        }
        std::string hole = t.substr(i + 1, close - i - 1);
        if (!declared(hole)) diag("unknown-placeholder", hole + " in relation template");
        i = close;
    }

    // attribute references in constraints, equations, expansions
    auto check_refs = [&](const Expr& e, const std::string& where) {
        std::vector<std::pair<std::string, std::string>> refs;
        std::vector<std::string> bad;
        detail::collect_refs(e, refs, bad);
        for (const auto& b : bad) diag("malformed-reference", b + " in " + where);
        for (const auto& [fn, ph] : refs) {
            int idx = m.pattern.index_of(ph);
            // AddVertex placeholders are allowed in later SetAttr values
            bool introduced = false;
            for (const auto& op : m.expansions) {
                if (op.kind == ExpansionOp::AddVertex && op.placeholder == ph) {
                    introduced = true;
                }
            }
            if (idx < 0 && !introduced) {
                diag("unknown-placeholder", ph + " in " + where);
                continue;
            }
            if (fn == "dirdiff") {
                if (idx >= 0 && m.pattern.vertices[idx].kind.tag != VertexKind::Line) {
                    diag("slot-kind-mismatch", "dirdiff(" + ph + ") on non-line in " + where);
                }
                continue;
            }
            if (idx >= 0 && !slot_for_ref(fn, m.pattern.vertices[idx].kind)) {
                diag("slot-kind-mismatch",
                     fn + "(" + ph + ") on " + to_string(m.pattern.vertices[idx].kind) +
                         " in " + where);
            }
        }
    };
    for (const auto& c : m.math_constraints) {
        check_refs(c.cmp.lhs, "math constraint " + c.source);
        check_refs(c.cmp.rhs, "math constraint " + c.source);
    }
    for (const auto& c : m.visual_constraints) {
        check_refs(c.cmp.lhs, "visual constraint " + c.source);
        check_refs(c.cmp.rhs, "visual constraint " + c.source);
    }
    for (const auto& e : m.equations) {
        check_refs(e.lhs, "equation " + e.source);
        check_refs(e.rhs, "equation " + e.source);
    }

    std::set<std::string> introduced;
    for (const auto& op : m.expansions) {
        auto known = [&](const std::string& p) {
            return declared(p) || introduced.count(p) > 0;
        };
        switch (op.kind) {
            case ExpansionOp::AddEdge:
                if (!known(op.u)) diag("unknown-placeholder", op.u + " in add_edge");
                if (!known(op.v)) diag("unknown-placeholder", op.v + " in add_edge");
                break;
            case ExpansionOp::AddVertex:
                if (known(op.placeholder)) {
                    diag("duplicate-placeholder", op.placeholder + " in add_vertex");
                }
                introduced.insert(op.placeholder);
                for (const auto& e : op.attach) {
                    if (!known(e.u)) diag("unknown-placeholder", e.u + " in add_vertex");
                    if (!known(e.v)) diag("unknown-placeholder", e.v + " in add_vertex");
                }
                break;
            case ExpansionOp::SetAttr: {
                if (!known(op.target)) {
                    diag("unknown-placeholder", op.target + " in set_attr");
                    break;
                }
                int idx = m.pattern.index_of(op.target);
                if (idx >= 0 && !slot_for_ref(op.slot_fn, m.pattern.vertices[idx].kind)) {
                    diag("slot-kind-mismatch",
                         op.slot_fn + "(" + op.target + ") in set_attr");
                }
                check_refs(op.value, "set_attr value");
                break;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON (de)serialization
// ---------------------------------------------------------------------------

namespace detail {

inline bool expr_mentions_fn(const Expr& e, const char* fn) {
    if (e->op == ExprOp::Call && e->sym == fn) return true;
    for (const auto& a : e->args) {
        if (expr_mentions_fn(a, fn)) return true;
    }
    return false;
}

inline ConstraintExpr constraint_from_json(const nlohmann::json& j, bool visual) {
    ConstraintExpr c;
    std::string expr_text;
    if (j.is_string()) {
        expr_text = j.get<std::string>();
    } else {
        expr_text = j.at("expr").get<std::string>();
    }
    c.source = expr_text;
    c.cmp = parse_comparison(expr_text);
    if (!visual) {
        c.tolerance = kMathConstraintTol;
        return c;
    }
    bool about_length = expr_mentions_fn(c.cmp.lhs, "length") ||
                        expr_mentions_fn(c.cmp.rhs, "length");
    c.relative = about_length;
    c.tolerance = about_length ? kDefaultLengthRelTol : kDefaultAngleTolDeg;
    if (j.is_object()) {
        if (j.contains("tolerance")) c.tolerance = j.at("tolerance").get<double>();
        if (j.contains("relative")) c.relative = j.at("relative").get<bool>();
    }
    return c;
}

inline nlohmann::json constraint_to_json(const ConstraintExpr& c, bool visual) {
    if (!visual) return c.source;
    nlohmann::json j;
    j["expr"] = c.source;
    j["tolerance"] = c.tolerance;
    j["relative"] = c.relative;
    return j;
}

}  // namespace detail

inline GraphModel model_from_json(const nlohmann::json& j) {
    GraphModel m;
    m.name = j.at("name").get<std::string>();
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "proving") {
        m.kind = GraphModel::Proving;
    } else if (kind == "property") {
        m.kind = GraphModel::Property;
    } else {
        throw ValidationError({"model " + m.name + ": unknown kind '" + kind + "'"});
    }

    for (const auto& jv : j.at("pattern").at("vertices")) {
        auto k = vertex_kind_from_string(jv.at(1).get<std::string>());
        if (!k) {
            throw ValidationError({"model " + m.name + ": unknown vertex kind " +
                                   jv.at(1).get<std::string>()});
        }
        m.pattern.vertices.push_back({jv.at(0).get<std::string>(), *k});
    }
    for (const auto& je : j.at("pattern").at("edges")) {
        auto k = edge_kind_from_string(je.at(2).get<std::string>());
        if (!k) {
            throw ValidationError({"model " + m.name + ": unknown edge kind " +
                                   je.at(2).get<std::string>()});
        }
        m.pattern.edges.push_back(
            {je.at(0).get<std::string>(), je.at(1).get<std::string>(), *k});
    }

    m.relation_template = j.value("relation_template", "");
    if (j.contains("math_constraints")) {
        for (const auto& jc : j.at("math_constraints")) {
            m.math_constraints.push_back(detail::constraint_from_json(jc, false));
        }
    }
    if (j.contains("visual_constraints")) {
        for (const auto& jc : j.at("visual_constraints")) {
            m.visual_constraints.push_back(detail::constraint_from_json(jc, true));
        }
    }
    if (j.contains("expansions")) {
        for (const auto& jo : j.at("expansions")) {
            ExpansionOp op;
            const std::string o = jo.at("op").get<std::string>();
            if (o == "add_edge") {
                op.kind = ExpansionOp::AddEdge;
                op.u = jo.at("u").get<std::string>();
                op.v = jo.at("v").get<std::string>();
                auto k = edge_kind_from_string(jo.at("kind").get<std::string>());
                if (!k) throw ValidationError({"model " + m.name + ": bad edge kind"});
                op.edge = *k;
            } else if (o == "add_vertex") {
                op.kind = ExpansionOp::AddVertex;
                op.placeholder = jo.at("id").get<std::string>();
                auto k = vertex_kind_from_string(jo.at("vertex_kind").get<std::string>());
                if (!k) throw ValidationError({"model " + m.name + ": bad vertex kind"});
                op.vertex_kind = *k;
                if (jo.contains("attach")) {
                    for (const auto& je : jo.at("attach")) {
                        auto ek = edge_kind_from_string(je.at(2).get<std::string>());
                        if (!ek) throw ValidationError({"model " + m.name + ": bad edge kind"});
                        op.attach.push_back(
                            {je.at(0).get<std::string>(), je.at(1).get<std::string>(), *ek});
                    }
                }
            } else if (o == "set_attr") {
                op.kind = ExpansionOp::SetAttr;
                op.target = jo.at("target").get<std::string>();
                op.slot_fn = jo.at("slot").get<std::string>();
                op.value_source = jo.at("value").get<std::string>();
                op.value = parse_expr(op.value_source);
            } else {
                throw ValidationError({"model " + m.name + ": unknown expansion op " + o});
            }
            m.expansions.push_back(std::move(op));
        }
    }
    if (j.contains("equations")) {
        for (const auto& je : j.at("equations")) {
            const std::string s = je.get<std::string>();
            Comparison c = parse_comparison(s);
            if (c.op != CmpOp::Eq) {
                throw ValidationError({"model " + m.name + ": equation must use '=': " + s});
            }
            m.equations.push_back({c.lhs, c.rhs, s});
        }
    }
    return m;
}

inline nlohmann::json model_to_json(const GraphModel& m) {
    nlohmann::json j;
    j["name"] = m.name;
    j["kind"] = m.kind == GraphModel::Proving ? "proving" : "property";
    j["pattern"]["vertices"] = nlohmann::json::array();
    for (const auto& v : m.pattern.vertices) {
        j["pattern"]["vertices"].push_back({v.placeholder, to_string(v.kind)});
    }
    j["pattern"]["edges"] = nlohmann::json::array();
    for (const auto& e : m.pattern.edges) {
        j["pattern"]["edges"].push_back({e.u, e.v, to_string(e.kind)});
    }
    j["relation_template"] = m.relation_template;
    if (!m.math_constraints.empty()) {
        for (const auto& c : m.math_constraints) {
            j["math_constraints"].push_back(detail::constraint_to_json(c, false));
        }
    }
    if (!m.visual_constraints.empty()) {
        for (const auto& c : m.visual_constraints) {
            j["visual_constraints"].push_back(detail::constraint_to_json(c, true));
        }
    }
    for (const auto& op : m.expansions) {
        nlohmann::json jo;
        switch (op.kind) {
            case ExpansionOp::AddEdge:
                jo = {{"op", "add_edge"}, {"u", op.u}, {"v", op.v},
                      {"kind", to_string(op.edge)}};
                break;
            case ExpansionOp::AddVertex: {
                jo = {{"op", "add_vertex"},
                      {"id", op.placeholder},
                      {"vertex_kind", to_string(op.vertex_kind)}};
                for (const auto& e : op.attach) {
                    jo["attach"].push_back({e.u, e.v, to_string(e.kind)});
                }
                break;
            }
            case ExpansionOp::SetAttr:
                jo = {{"op", "set_attr"},
                      {"target", op.target},
                      {"slot", op.slot_fn},
                      {"value", op.value_source}};
                break;
        }
        j["expansions"].push_back(jo);
    }
    for (const auto& e : m.equations) {
        j["equations"].push_back(e.source);
    }
    return j;
}

// ---------------------------------------------------------------------------
// Pool
// ---------------------------------------------------------------------------

struct ModelPool {
    std::vector<GraphModel> models;  // file order, which the heuristic follows

    std::vector<const GraphModel*> proving() const {
        std::vector<const GraphModel*> out;
        for (const auto& m : models) {
            if (m.kind == GraphModel::Proving) out.push_back(&m);
        }
        return out;
    }
    std::vector<const GraphModel*> property() const {
        std::vector<const GraphModel*> out;
        for (const auto& m : models) {
            if (m.kind == GraphModel::Property) out.push_back(&m);
        }
        return out;
    }
    const GraphModel* find(const std::string& name) const {
        for (const auto& m : models) {
            if (m.name == name) return &m;
        }
        return nullptr;
    }
};

inline ModelPool pool_from_json(const nlohmann::json& j) {
    ModelPool pool;
    std::vector<std::string> issues;
    for (const auto& jm : j.at("models")) {
        GraphModel m;
        try {
            m = model_from_json(jm);
        } catch (const Error& e) {
            issues.push_back(e.what());
            continue;
        }
        for (const auto& d : validate_model(m)) {
            issues.push_back("model " + m.name + ": " + d.code + ": " + d.detail);
        }
        pool.models.push_back(std::move(m));
    }
    if (!issues.empty()) throw ValidationError(std::move(issues));
    return pool;
}

inline nlohmann::json pool_to_json(const ModelPool& pool) {
    nlohmann::json j;
    j["models"] = nlohmann::json::array();
    for (const auto& m : pool.models) j["models"].push_back(model_to_json(m));
    return j;
}

inline ModelPool load_pool(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open pool file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw IoError("malformed JSON in " + path + ": " + e.what());
    }
    return pool_from_json(j);
}

}  // namespace holo
