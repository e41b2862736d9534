#pragma once

// Pattern matching between a model's pattern graph and the global hologram:
// kind- and edge-preserving injective mappings (monomorphism semantics, so
// extra edges among mapped vertices are fine), followed by mathematical and
// visual constraint verification.
//
// Mapping enumeration is deterministic: pattern vertices are ordered by
// descending degree then by rarest kind in the host graph, and candidates are
// tried in ascending vertex id, so results come out in lexicographic order of
// the mapped-id tuple under that fixed order.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "holo/attrs.hpp"
#include "holo/equation.hpp"
#include "holo/hologram.hpp"
#include "holo/model.hpp"

namespace holo {

using Mapping = std::map<std::string, int>;

struct MatchResult {
    std::string model;
    Mapping mapping;
    std::string relation;
    std::vector<std::pair<std::string, bool>> checks;  // constraint source -> outcome
    std::vector<Equation> equations;                   // property models only
};

struct MatchOptions {
    int mapping_limit = 64;   // raw mappings examined per model
    int result_limit = 16;    // verified results returned
    bool check_math = true;   // ablation switches
    bool check_visual = true;
};

// ---------------------------------------------------------------------------
// Mapping search
// ---------------------------------------------------------------------------

inline std::vector<Mapping> find_mappings(const PatternHologram& pattern, const Hologram& g,
                                          int limit = 1 << 20) {
    const int n = (int)pattern.vertices.size();
    std::vector<Mapping> results;
    if (n == 0 || limit < 1) return results;

    // adjacency among pattern placeholders
    std::vector<std::vector<std::pair<int, EdgeKind>>> padj(n);
    for (const auto& e : pattern.edges) {
        int u = pattern.index_of(e.u);
        int v = pattern.index_of(e.v);
        if (u < 0 || v < 0 || u == v) return results;  // malformed pattern: no matches
        padj[u].push_back({v, e.kind});
        padj[v].push_back({u, e.kind});
    }

    std::map<VertexKind, std::vector<int>> by_kind;
    for (const auto& v : g.vertices()) by_kind[v.kind].push_back(v.id);
    for (int i = 0; i < n; ++i) {
        if (!by_kind.count(pattern.vertices[i].kind)) return results;
    }

    // search order: high degree first, then rare kind, then declaration index
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (padj[a].size() != padj[b].size()) return padj[a].size() > padj[b].size();
        std::size_t ra = by_kind[pattern.vertices[a].kind].size();
        std::size_t rb = by_kind[pattern.vertices[b].kind].size();
        if (ra != rb) return ra < rb;
        return a < b;
    });
    std::vector<int> depth_of(n);
    for (int d = 0; d < n; ++d) depth_of[order[d]] = d;

    std::vector<int> assigned(n, -1);
    std::vector<bool> used(g.vertex_count(), false);

    auto emit = [&]() {
        Mapping m;
        for (int i = 0; i < n; ++i) m[pattern.vertices[i].placeholder] = assigned[i];
        results.push_back(std::move(m));
    };

    std::function<bool(int)> dfs = [&](int depth) -> bool {
        if (depth == n) {
            emit();
            return (int)results.size() < limit;
        }
        int pv = order[depth];
        const VertexKind want = pattern.vertices[pv].kind;

        // candidate source: neighbors of an already-assigned pattern neighbor
        const std::vector<int>* candidates = nullptr;
        std::vector<int> from_neighbor;
        for (const auto& [pn, kind] : padj[pv]) {
            if (assigned[pn] >= 0) {
                from_neighbor = g.neighbors(assigned[pn], kind);
                candidates = &from_neighbor;
                break;
            }
        }
        if (!candidates) candidates = &by_kind[want];

        for (int c : *candidates) {
            if (used[c] || g.vertex(c).kind != want) continue;
            bool ok = true;
            for (const auto& [pn, kind] : padj[pv]) {
                if (assigned[pn] >= 0 && !g.has_edge(c, assigned[pn], kind)) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            assigned[pv] = c;
            used[c] = true;
            bool keep_going = dfs(depth + 1);
            used[c] = false;
            assigned[pv] = -1;
            if (!keep_going) return false;
        }
        return true;
    };
    dfs(0);
    return results;
}

// ---------------------------------------------------------------------------
// Constraint verification
// ---------------------------------------------------------------------------

namespace detail {

// Replaces fn(placeholder) references with numbers via the resolver; returns
// nullopt when any reference has no value.
template <typename AttrFn, typename DirFn>
inline std::optional<Expr> resolve_refs(const Expr& e, const Mapping& mapping, AttrFn&& attr,
                                        DirFn&& dirdiff) {
    bool missing = false;
    Expr out = map_leaves(e, [&](const Expr& node) -> Expr {
        if (node->op != ExprOp::Call) return nullptr;
        if (is_attr_ref_fn(node->sym) && node->args.size() == 1 &&
            node->args[0]->op == ExprOp::Sym) {
            auto it = mapping.find(node->args[0]->sym);
            if (it == mapping.end()) {
                missing = true;
                return ex::num(0);
            }
            auto v = attr(node->sym, it->second);
            if (!v) {
                missing = true;
                return ex::num(0);
            }
            return ex::num(*v);
        }
        if (node->sym == "dirdiff" && node->args.size() == 2 &&
            node->args[0]->op == ExprOp::Sym && node->args[1]->op == ExprOp::Sym) {
            auto a = mapping.find(node->args[0]->sym);
            auto b = mapping.find(node->args[1]->sym);
            if (a == mapping.end() || b == mapping.end()) {
                missing = true;
                return ex::num(0);
            }
            auto v = dirdiff(a->second, b->second);
            if (!v) {
                missing = true;
                return ex::num(0);
            }
            return ex::num(*v);
        }
        return nullptr;
    });
    if (missing) return std::nullopt;
    return out;
}

inline bool compare_with_tolerance(CmpOp op, double l, double r, double tol, bool relative) {
    double scale = relative ? std::max(std::abs(l), std::abs(r)) : 1.0;
    double gap = tol * scale;
    switch (op) {
        case CmpOp::Eq: return std::abs(l - r) <= gap;
        case CmpOp::Ne: return std::abs(l - r) > gap;
        case CmpOp::Lt: return l < r;
        case CmpOp::Le: return l <= r;
    }
    return false;
}

}  // namespace detail

// Mathematical constraints evaluate over known attribute values; a constraint
// that touches an unknown attribute is false (the theorem is not yet
// establishable).
inline bool verify_math(const std::vector<ConstraintExpr>& constraints, const Mapping& mapping,
                        const Hologram& g,
                        std::vector<std::pair<std::string, bool>>* checks = nullptr) {
    bool all = true;
    for (const auto& c : constraints) {
        auto attr = [&](const std::string& fn, int vertex) -> std::optional<double> {
            auto slot = slot_for_ref(fn, g.vertex(vertex).kind);
            if (!slot) return std::nullopt;
            const MathAttr* a = g.find_attr(vertex, *slot);
            if (!a || !a->value) return std::nullopt;
            return a->value;
        };
        auto nodir = [](int, int) -> std::optional<double> { return std::nullopt; };
        bool ok = false;
        auto lhs = detail::resolve_refs(c.cmp.lhs, mapping, attr, nodir);
        auto rhs = detail::resolve_refs(c.cmp.rhs, mapping, attr, nodir);
        if (lhs && rhs) {
            auto l = eval_const(*lhs);
            auto r = eval_const(*rhs);
            ok = l && r &&
                 detail::compare_with_tolerance(c.cmp.op, *l, *r, kMathConstraintTol, false);
        }
        if (checks) checks->push_back({c.source, ok});
        all = all && ok;
    }
    return all;
}

// Visual constraints evaluate over diagram-derived values with per-constraint
// tolerances. A missing visual attribute fails the constraint and records a
// diagnostic.
inline bool verify_visual(const std::vector<ConstraintExpr>& constraints,
                          const Mapping& mapping, const Hologram& g,
                          std::vector<std::pair<std::string, bool>>* checks = nullptr,
                          std::vector<std::string>* diagnostics = nullptr) {
    bool all = true;
    for (const auto& c : constraints) {
        bool missing = false;
        auto attr = [&](const std::string& fn, int vertex) -> std::optional<double> {
            (void)fn;
            const auto& vis = g.vertex(vertex).visual;
            if (!vis.measure) missing = true;
            return vis.measure;
        };
        auto dirdiff = [&](int a, int b) -> std::optional<double> {
            const auto& va = g.vertex(a).visual;
            const auto& vb = g.vertex(b).visual;
            if (!va.direction || !vb.direction) {
                missing = true;
                return std::nullopt;
            }
            double d = std::abs(*va.direction - *vb.direction);
            if (d > 90.0) d = 180.0 - d;
            return d;
        };
        bool ok = false;
        auto lhs = detail::resolve_refs(c.cmp.lhs, mapping, attr, dirdiff);
        auto rhs = detail::resolve_refs(c.cmp.rhs, mapping, attr, dirdiff);
        if (lhs && rhs) {
            auto l = eval_const(*lhs);
            auto r = eval_const(*rhs);
            ok = l && r &&
                 detail::compare_with_tolerance(c.cmp.op, *l, *r, c.tolerance, c.relative);
        }
        if (missing && diagnostics) {
            diagnostics->push_back("visual constraint '" + c.source +
                                   "' skipped a mapping: missing visual attribute");
        }
        if (checks) checks->push_back({c.source, ok});
        all = all && ok;
    }
    return all;
}

// ---------------------------------------------------------------------------
// Template instantiation
// ---------------------------------------------------------------------------

// Equation templates with placeholder refs replaced by the mapped vertices'
// attribute variables. Creates missing slots (fresh unknowns) on the way.
inline std::vector<Equation> instantiate_model_equations(const GraphModel& model,
                                                         const Mapping& mapping, Hologram& g,
                                                         VarTable& vars) {
    std::vector<Equation> out;
    auto translate = [&](const Expr& e) {
        return map_leaves(e, [&](const Expr& node) -> Expr {
            if (node->op == ExprOp::Call && is_attr_ref_fn(node->sym) &&
                node->args.size() == 1 && node->args[0]->op == ExprOp::Sym) {
                int vertex = mapping.at(node->args[0]->sym);
                auto slot = slot_for_ref(node->sym, g.vertex(vertex).kind);
                if (!slot) {
                    throw ValidationError({"model " + model.name + ": " + node->sym +
                                           " not valid for mapped vertex " +
                                           g.vertex(vertex).name});
                }
                return ex::var(ensure_attr_var(g, vars, vertex, *slot));
            }
            return nullptr;
        });
    };
    for (const auto& t : model.equations) {
        out.push_back(make_equation(translate(t.lhs), translate(t.rhs), model.name));
    }
    return out;
}

inline std::string instantiate_relation(const std::string& tmpl, const Mapping& mapping,
                                        const Hologram& g) {
    std::string out;
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        if (tmpl[i] != '{') {
            out += tmpl[i];
            continue;
        }
        auto close = tmpl.find('}', i);
        if (close == std::string::npos) {
            out += tmpl.substr(i);
            break;
        }
        std::string hole = tmpl.substr(i + 1, close - i - 1);
        auto it = mapping.find(hole);
        out += it != mapping.end() ? g.vertex(it->second).name : "{" + hole + "}";
        i = close;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Full model matching
// ---------------------------------------------------------------------------

// Verified matches in deterministic order. Property-model mappings whose
// instantiated equations are all already in `accumulated` are skipped: they
// cannot advance the solution.
inline std::vector<MatchResult> match_model(const GraphModel& model, Hologram& g,
                                            VarTable& vars, const EquationSet* accumulated,
                                            const MatchOptions& opts = {},
                                            std::vector<std::string>* diagnostics = nullptr) {
    std::vector<MatchResult> out;
    for (const auto& mapping : find_mappings(model.pattern, g, opts.mapping_limit)) {
        std::vector<std::pair<std::string, bool>> checks;
        if (model.kind == GraphModel::Proving && opts.check_math &&
            !verify_math(model.math_constraints, mapping, g, &checks)) {
            continue;
        }
        if (opts.check_visual &&
            !verify_visual(model.visual_constraints, mapping, g, &checks, diagnostics)) {
            continue;
        }
        MatchResult r;
        r.model = model.name;
        r.mapping = mapping;
        r.checks = std::move(checks);
        if (model.kind == GraphModel::Property) {
            r.equations = instantiate_model_equations(model, mapping, g, vars);
            if (accumulated) {
                bool all_known = true;
                for (const auto& e : r.equations) {
                    all_known = all_known && accumulated->contains(e);
                }
                if (all_known) continue;  // no progress from this mapping
            }
        }
        r.relation = instantiate_relation(model.relation_template, mapping, g);
        out.push_back(std::move(r));
        if ((int)out.size() >= opts.result_limit) break;
    }
    return out;
}

inline std::optional<MatchResult> match_first(const GraphModel& model, Hologram& g,
                                              VarTable& vars, const EquationSet* accumulated,
                                              MatchOptions opts = {}) {
    opts.result_limit = 1;
    auto r = match_model(model, g, vars, accumulated, opts);
    if (r.empty()) return std::nullopt;
    return r.front();
}

}  // namespace holo
