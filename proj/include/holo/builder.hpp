#pragma once

// Converts a parsed problem into its global hologram: one vertex per distinct
// primitive that is mentioned or geometrically implied, edges for declared
// relations, seed equations (or directly resolved values) for Equals
// literals, the reasoning target from the Find literal, and visual attributes
// derived from the diagram point coordinates.
//
// Construction rules (also pinned by the golden tests):
//   Line(A,B)        -> Line vertex, Incident to both endpoint Points
//   Angle(A,B,C)     -> Angle vertex at B, Incident to B, Adjacent to the
//                       side lines BA and BC
//   Polygon(P1..Pn)  -> Polygon vertex Adjacent to each side Line; a corner
//                       Angle per vertex
//   Circle(O)        -> Circle vertex, center Point Adjacent to it
//   Arc(A,B)         -> Arc vertex Adjacent to its Circle, Incident to A, B
//   PointLiesOnLine  -> interior point splits the line into consecutive
//                       sub-segments (each Adjacent to the parent line) and
//                       seeds the length-sum equation
//
// Composite-to-constituent containment is Adjacent; point-on-primitive
// contact is Incident.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "holo/attrs.hpp"
#include "holo/equation.hpp"
#include "holo/error.hpp"
#include "holo/hologram.hpp"
#include "holo/literal.hpp"

namespace holo {

struct BuiltProblem {
    ProblemInput input;
    Hologram hologram;
    VarTable vars;
    EquationSet equations;                       // seeds + directly resolved bindings
    std::map<int, std::vector<std::string>> vertex_points;  // construction metadata
    std::vector<std::string> diagnostics;
};

class HologramBuilder {
public:
    explicit HologramBuilder(const ProblemInput& input) { out_.input = input; }

    BuiltProblem build() {
        // pass A: primitives and structural relations
        for (const auto& l : out_.input.text_literals) {
            if (l.predicate != "Equals" && l.predicate != "Find") process_structural(l);
        }
        for (const auto& l : out_.input.diagram_literals) {
            if (l.predicate != "Equals" && l.predicate != "Find") process_structural(l);
        }
        finalize_collinear_chains();
        finalize_circles();

        // pass B: algebraic content
        for (const auto& l : out_.input.text_literals) {
            if (l.predicate == "Equals") process_equals(l);
        }
        for (const auto& l : out_.input.diagram_literals) {
            if (l.predicate == "Equals") process_equals(l);
        }
        for (const auto& l : out_.input.text_literals) {
            if (l.predicate == "Find") process_find(l);
        }

        derive_visual_attrs();
        return std::move(out_);
    }

    // --- naming helpers (also used by tests) --------------------------------

    static std::string canon_line_name(std::string a, std::string b) {
        if (b < a) std::swap(a, b);
        return a + b;
    }

    static std::string canon_angle_name(const std::string& a, const std::string& b,
                                        const std::string& c) {
        return a <= c ? a + b + c : c + b + a;
    }

    static std::vector<std::string> canon_polygon_cycle(std::vector<std::string> pts) {
        const std::size_t n = pts.size();
        std::vector<std::string> best;
        for (int dir = 0; dir < 2; ++dir) {
            for (std::size_t s = 0; s < n; ++s) {
                std::vector<std::string> cand;
                cand.reserve(n);
                for (std::size_t i = 0; i < n; ++i) cand.push_back(pts[(s + i) % n]);
                if (best.empty() || cand < best) best = cand;
            }
            std::reverse(pts.begin(), pts.end());
        }
        return best;
    }

private:
    // --- vertex registries ---------------------------------------------------

    int ensure_point(const std::string& name) {
        auto it = points_.find(name);
        if (it != points_.end()) return it->second;
        int id = out_.hologram.add_vertex(VertexKind::point(), name);
        points_[name] = id;
        out_.vertex_points[id] = {name};
        return id;
    }

    int ensure_line(const std::string& a, const std::string& b) {
        if (a == b) fail("degenerate line " + a + a);
        std::string key = canon_line_name(a, b);
        auto it = lines_.find(key);
        if (it != lines_.end()) return it->second;
        int pa = ensure_point(std::min(a, b));
        int pb = ensure_point(std::max(a, b));
        int id = out_.hologram.add_vertex(VertexKind::line(), key);
        lines_[key] = id;
        out_.vertex_points[id] = {std::min(a, b), std::max(a, b)};
        out_.hologram.add_edge(id, pa, EdgeKind::Incident);
        out_.hologram.add_edge(id, pb, EdgeKind::Incident);
        return id;
    }

    int ensure_angle(const std::string& a, const std::string& b, const std::string& c) {
        if (a == b || b == c || a == c) fail("degenerate angle " + a + b + c);
        std::string key = canon_angle_name(a, b, c);
        auto it = angles_.find(key);
        if (it != angles_.end()) return it->second;
        int vertex_pt = ensure_point(b);
        int s1 = ensure_line(b, a);
        int s2 = ensure_line(b, c);
        int id = out_.hologram.add_vertex(VertexKind::angle(), key);
        angles_[key] = id;
        const std::string& first = a <= c ? a : c;
        const std::string& last = a <= c ? c : a;
        out_.vertex_points[id] = {first, b, last};
        out_.hologram.add_edge(id, vertex_pt, EdgeKind::Incident);
        out_.hologram.add_edge(id, s1, EdgeKind::Adjacent);
        out_.hologram.add_edge(id, s2, EdgeKind::Adjacent);
        return id;
    }

    int ensure_labeled_angle(const std::string& label) {
        std::string key = "#" + label;
        auto it = angles_.find(key);
        if (it != angles_.end()) return it->second;
        int id = out_.hologram.add_vertex(VertexKind::angle(), label);
        angles_[key] = id;
        return id;
    }

    int ensure_polygon(const std::vector<std::string>& pts) {
        if (pts.size() < 3) fail("polygon needs at least 3 points");
        std::set<std::string> uniq(pts.begin(), pts.end());
        if (uniq.size() != pts.size()) fail("repeated point in polygon");
        std::vector<std::string> cycle = canon_polygon_cycle(pts);
        std::string key;
        for (const auto& p : cycle) key += p;
        auto it = polygons_.find(key);
        if (it != polygons_.end()) return it->second;

        const std::size_t n = cycle.size();
        for (const auto& p : cycle) ensure_point(p);
        std::vector<int> sides;
        for (std::size_t i = 0; i < n; ++i) {
            sides.push_back(ensure_line(cycle[i], cycle[(i + 1) % n]));
        }
        for (std::size_t i = 0; i < n; ++i) {
            ensure_angle(cycle[(i + n - 1) % n], cycle[i], cycle[(i + 1) % n]);
        }
        int id = out_.hologram.add_vertex(VertexKind::polygon((int)n), key);
        polygons_[key] = id;
        out_.vertex_points[id] = cycle;
        for (int s : sides) out_.hologram.add_edge(id, s, EdgeKind::Adjacent);
        return id;
    }

    int ensure_circle(const std::string& center) {
        auto it = circles_.find(center);
        if (it != circles_.end()) return it->second;
        int c = ensure_point(center);
        int id = out_.hologram.add_vertex(VertexKind::circle(), "⊙" + center);
        circles_[center] = id;
        out_.vertex_points[id] = {center};
        out_.hologram.add_edge(id, c, EdgeKind::Adjacent);
        return id;
    }

    int ensure_arc(const std::string& a, const std::string& b) {
        std::string key = canon_line_name(a, b);
        auto it = arcs_.find(key);
        if (it != arcs_.end()) return it->second;
        int pa = ensure_point(std::min(a, b));
        int pb = ensure_point(std::max(a, b));
        int id = out_.hologram.add_vertex(VertexKind::arc(), key);
        arcs_[key] = id;
        out_.vertex_points[id] = {std::min(a, b), std::max(a, b)};
        out_.hologram.add_edge(id, pa, EdgeKind::Incident);
        out_.hologram.add_edge(id, pb, EdgeKind::Incident);
        return id;
    }

    // --- attribute variables --------------------------------------------------

    int attr_var(int vertex, Slot slot) {
        return ensure_attr_var(out_.hologram, out_.vars, vertex, slot);
    }

    int literal_var(const std::string& name) {
        auto it = literal_vars_.find(name);
        if (it != literal_vars_.end()) return it->second;
        int id = out_.vars.fresh(name);
        literal_vars_[name] = id;
        return id;
    }

    // --- structural literals --------------------------------------------------

    void process_structural(const Literal& l) {
        const auto& args = l.args;
        const std::string& p = l.predicate;
        if (p == "Point") {
            ensure_point(ident(args[0]));
        } else if (p == "Line") {
            ensure_line(ident(args[0]), ident(args[1]));
        } else if (p == "Angle") {
            ensure_angle_term(l.term);
        } else if (p == "Arc") {
            ensure_arc_term(l.term);
        } else if (p == "Circle") {
            ensure_circle_term(l.term);
        } else if (p == "Triangle" || p == "Quadrilateral" || p == "Parallelogram" ||
                   p == "Rectangle" || p == "Square" || p == "Rhombus" || p == "Trapezoid" ||
                   p == "Kite" || p == "Pentagon" || p == "Hexagon" || p == "Polygon") {
            process_shape(p, args);
        } else if (p == "PointLiesOnLine") {
            const std::string pt = ident(args[0]);
            auto [a, b] = line_points(args[1]);
            int line = ensure_line(a, b);
            ensure_point(pt);
            on_line_[line].insert(pt);
            on_line_[line].insert(a);
            on_line_[line].insert(b);
            out_.hologram.add_edge(ensure_point(pt), line, EdgeKind::Incident);
        } else if (p == "PointLiesOnCircle") {
            const std::string pt = ident(args[0]);
            int circle = ensure_circle_term(args[1]);
            on_circle_[circle].insert(pt);
            out_.hologram.add_edge(ensure_point(pt), circle, EdgeKind::Incident);
        } else if (p == "Parallel") {
            int l1 = ensure_line_term(args[0]);
            int l2 = ensure_line_term(args[1]);
            out_.hologram.add_edge(l1, l2, EdgeKind::Parallel);
        } else if (p == "Perpendicular") {
            int l1 = ensure_line_term(args[0]);
            int l2 = ensure_line_term(args[1]);
            out_.hologram.add_edge(l1, l2, EdgeKind::Perpendicular);
        } else if (p == "IntersectAt") {
            const std::string pt = ident(args.back());
            ensure_point(pt);
            for (std::size_t i = 0; i + 1 < args.size(); ++i) {
                auto [a, b] = line_points(args[i]);
                int line = ensure_line(a, b);
                on_line_[line].insert({pt, a, b});
                out_.hologram.add_edge(points_.at(pt), line, EdgeKind::Incident);
            }
        } else if (p == "BisectsAngle") {
            process_bisects(args);
        } else if (p == "Tangent") {
            int line = ensure_line_term(args[0]);
            int circle = ensure_circle_term(args[1]);
            out_.hologram.add_edge(line, circle, EdgeKind::Incident);
        } else if (p == "IsMidpointOf") {
            const std::string m = ident(args[0]);
            auto [a, b] = line_points(args[1]);
            int line = ensure_line(a, b);
            ensure_point(m);
            on_line_[line].insert({m, a, b});
            out_.hologram.add_edge(points_.at(m), line, EdgeKind::Incident);
            seed(ex::var(attr_var(ensure_line(a, m), Slot::Length)),
                 ex::var(attr_var(ensure_line(m, b), Slot::Length)));
        } else if (p == "IsRadiusOf") {
            int line = ensure_line_term(args[0]);
            int circle = ensure_circle_term(args[1]);
            seed(ex::var(attr_var(line, Slot::Length)),
                 ex::var(attr_var(circle, Slot::Radius)));
        } else if (p == "IsDiameterOf") {
            int line = ensure_line_term(args[0]);
            int circle = ensure_circle_term(args[1]);
            seed(ex::var(attr_var(line, Slot::Length)),
                 ex::mul(ex::num(2), ex::var(attr_var(circle, Slot::Radius))));
        } else if (p == "IsChordOf") {
            int line = ensure_line_term(args[0]);
            int circle = ensure_circle_term(args[1]);
            for (const auto& e : out_.vertex_points.at(line)) {
                on_circle_[circle].insert(e);
                out_.hologram.add_edge(ensure_point(e), circle, EdgeKind::Incident);
            }
        } else if (p == "InscribedIn") {
            int shape = ensure_shape_term(args[0]);
            int circle = ensure_circle_term(args[1]);
            for (const auto& pt : out_.vertex_points.at(shape)) {
                on_circle_[circle].insert(pt);
                out_.hologram.add_edge(ensure_point(pt), circle, EdgeKind::Incident);
            }
            out_.hologram.add_edge(shape, circle, EdgeKind::Incident);
        } else if (p == "CircumscribedTo") {
            ensure_shape_term(args[0]);
            ensure_circle_term(args[1]);
            out_.diagnostics.push_back("CircumscribedTo recorded without tangency expansion");
        } else if (p == "Similar" || p == "Congruent") {
            process_pairwise(p, args);
        } else if (p == "Equilateral") {
            int shape = ensure_shape_term(args[0]);
            congruent_sides(shape, /*all_pairs=*/true);
        } else if (p == "Isosceles") {
            // convention: the first two listed sides are the congruent legs
            int shape = ensure_shape_term(args[0]);
            congruent_sides(shape, /*all_pairs=*/false);
        } else if (p == "Regular") {
            int shape = ensure_shape_term(args[0]);
            congruent_sides(shape, /*all_pairs=*/true);
            equal_corner_angles(shape);
        } else {
            fail("literal " + print_literal(l) + " is not usable as a structural relation");
        }
    }

    void process_shape(const std::string& p, const std::vector<Expr>& args) {
        std::vector<std::string> pts;
        pts.reserve(args.size());
        for (const auto& a : args) pts.push_back(ident(a));
        int poly = ensure_polygon(pts);
        const auto& cycle = out_.vertex_points.at(poly);
        const std::size_t n = cycle.size();
        auto side = [&](std::size_t i) {
            return ensure_line(cycle[i], cycle[(i + 1) % n]);
        };
        auto corner = [&](std::size_t i) {
            return ensure_angle(cycle[(i + n - 1) % n], cycle[i], cycle[(i + 1) % n]);
        };
        if (p == "Parallelogram" || p == "Rectangle" || p == "Square" || p == "Rhombus") {
            out_.hologram.add_edge(side(0), side(2), EdgeKind::Parallel);
            out_.hologram.add_edge(side(1), side(3), EdgeKind::Parallel);
        }
        if (p == "Trapezoid") {
            out_.hologram.add_edge(side(0), side(2), EdgeKind::Parallel);
        }
        if (p == "Rectangle" || p == "Square") {
            for (std::size_t i = 0; i < 4; ++i) {
                out_.hologram.add_edge(side(i), side((i + 1) % 4), EdgeKind::Perpendicular);
                resolve(corner(i), Slot::AngleMeasure, 90.0);
            }
        }
        if (p == "Square" || p == "Rhombus") {
            congruent_sides(poly, /*all_pairs=*/true);
        }
        if (p == "Kite") {
            out_.hologram.add_edge(side(0), side(3), EdgeKind::Congruent);
            out_.hologram.add_edge(side(1), side(2), EdgeKind::Congruent);
            seed(ex::var(attr_var(side(0), Slot::Length)),
                 ex::var(attr_var(side(3), Slot::Length)));
            seed(ex::var(attr_var(side(1), Slot::Length)),
                 ex::var(attr_var(side(2), Slot::Length)));
        }
    }

    void process_bisects(const std::vector<Expr>& args) {
        auto [d1, d2] = line_points(args[0]);
        if (args[1]->op != ExprOp::Call || args[1]->sym != "Angle" ||
            args[1]->args.size() != 3) {
            fail("BisectsAngle expects a three-point angle");
        }
        std::string a = ident(args[1]->args[0]);
        std::string b = ident(args[1]->args[1]);
        std::string c = ident(args[1]->args[2]);
        // the bisecting ray starts at the angle vertex
        std::string ray = d1 == b ? d2 : d2 == b ? d1 : "";
        if (ray.empty()) fail("bisector must pass through the angle vertex");
        ensure_line(d1, d2);
        int whole = ensure_angle(a, b, c);
        int half1 = ensure_angle(a, b, ray);
        int half2 = ensure_angle(ray, b, c);
        seed(ex::var(attr_var(half1, Slot::AngleMeasure)),
             ex::var(attr_var(half2, Slot::AngleMeasure)));
        seed(ex::add(ex::var(attr_var(half1, Slot::AngleMeasure)),
                     ex::var(attr_var(half2, Slot::AngleMeasure))),
             ex::var(attr_var(whole, Slot::AngleMeasure)));
    }

    void process_pairwise(const std::string& p, const std::vector<Expr>& args) {
        EdgeKind kind = p == "Similar" ? EdgeKind::Similar : EdgeKind::Congruent;
        const Expr& a = args[0];
        const Expr& b = args[1];
        if (a->op != ExprOp::Call || b->op != ExprOp::Call || a->sym != b->sym) {
            fail(p + " expects two primitives of the same kind");
        }
        if (a->sym == "Line") {
            int l1 = ensure_line_term(a);
            int l2 = ensure_line_term(b);
            out_.hologram.add_edge(l1, l2, kind);
            if (kind == EdgeKind::Congruent) {
                seed(ex::var(attr_var(l1, Slot::Length)), ex::var(attr_var(l2, Slot::Length)));
            }
        } else if (a->sym == "Angle") {
            int a1 = ensure_angle_term(a);
            int a2 = ensure_angle_term(b);
            out_.hologram.add_edge(a1, a2, kind);
            seed(ex::var(attr_var(a1, Slot::AngleMeasure)),
                 ex::var(attr_var(a2, Slot::AngleMeasure)));
        } else if (a->sym == "Arc") {
            int r1 = ensure_arc_term(a);
            int r2 = ensure_arc_term(b);
            out_.hologram.add_edge(r1, r2, kind);
            seed(ex::var(attr_var(r1, Slot::ArcMeasure)),
                 ex::var(attr_var(r2, Slot::ArcMeasure)));
        } else {
            int s1 = ensure_shape_term(a);
            int s2 = ensure_shape_term(b);
            if (s1 == s2) fail(p + " of a primitive with itself");
            out_.hologram.add_edge(s1, s2, kind);
        }
    }

    void congruent_sides(int poly, bool all_pairs) {
        const auto& cycle = out_.vertex_points.at(poly);
        const std::size_t n = cycle.size();
        std::vector<int> sides;
        for (std::size_t i = 0; i < n; ++i) {
            sides.push_back(ensure_line(cycle[i], cycle[(i + 1) % n]));
        }
        std::size_t limit = all_pairs ? n : 2;
        for (std::size_t i = 0; i + 1 < limit; ++i) {
            out_.hologram.add_edge(sides[i], sides[i + 1], EdgeKind::Congruent);
            seed(ex::var(attr_var(sides[i], Slot::Length)),
                 ex::var(attr_var(sides[i + 1], Slot::Length)));
        }
        if (all_pairs && n > 2) {
            out_.hologram.add_edge(sides[n - 1], sides[0], EdgeKind::Congruent);
            seed(ex::var(attr_var(sides[n - 1], Slot::Length)),
                 ex::var(attr_var(sides[0], Slot::Length)));
        }
    }

    void equal_corner_angles(int poly) {
        const auto& cycle = out_.vertex_points.at(poly);
        const std::size_t n = cycle.size();
        std::vector<int> corners;
        for (std::size_t i = 0; i < n; ++i) {
            corners.push_back(
                ensure_angle(cycle[(i + n - 1) % n], cycle[i], cycle[(i + 1) % n]));
        }
        for (std::size_t i = 0; i + 1 < n; ++i) {
            seed(ex::var(attr_var(corners[i], Slot::AngleMeasure)),
                 ex::var(attr_var(corners[i + 1], Slot::AngleMeasure)));
        }
    }

    // --- term resolution -------------------------------------------------------

    std::string ident(const Expr& e) const {
        if (e->op != ExprOp::Sym) {
            fail("expected an identifier, got " + to_string(e));
        }
        return e->sym;
    }

    std::pair<std::string, std::string> line_points(const Expr& e) const {
        if (e->op != ExprOp::Call || e->sym != "Line" || e->args.size() != 2) {
            fail("expected Line(A, B), got " + to_string(e));
        }
        return {ident(e->args[0]), ident(e->args[1])};
    }

    int ensure_line_term(const Expr& e) {
        auto [a, b] = line_points(e);
        return ensure_line(a, b);
    }

    int ensure_circle_term(const Expr& e) {
        if (e->op == ExprOp::Sym) return ensure_circle(e->sym);
        if (e->op != ExprOp::Call || e->sym != "Circle") {
            fail("expected Circle(...), got " + to_string(e));
        }
        int c = ensure_circle(ident(e->args[0]));
        if (e->args.size() == 2) {
            // second argument names the radius as a symbolic variable
            const std::string rname = ident(e->args[1]);
            int rvar = attr_var(c, Slot::Radius);
            auto it = literal_vars_.find(rname);
            if (it == literal_vars_.end()) {
                literal_vars_[rname] = rvar;
            } else if (it->second != rvar) {
                seed(ex::var(it->second), ex::var(rvar));
            }
        }
        return c;
    }

    int ensure_angle_term(const Expr& e) {
        if (e->op != ExprOp::Call || e->sym != "Angle") {
            fail("expected Angle(...), got " + to_string(e));
        }
        if (e->args.size() == 3) {
            return ensure_angle(ident(e->args[0]), ident(e->args[1]), ident(e->args[2]));
        }
        if (e->args.size() != 1) fail("Angle takes one or three arguments");
        const Expr& a = e->args[0];
        if (a->op == ExprOp::Num) {
            return ensure_labeled_angle(detail::format_number(a->num));
        }
        std::string name = ident(a);
        // single uppercase letter: the (unique) angle at that point
        if (name.size() == 1 && std::isupper((unsigned char)name[0])) {
            return angle_at_point(name);
        }
        return ensure_labeled_angle(name);
    }

    int angle_at_point(const std::string& p) {
        std::vector<int> found;
        for (const auto& [key, id] : angles_) {
            const auto& pts = out_.vertex_points.count(id) ? out_.vertex_points.at(id)
                                                           : std::vector<std::string>{};
            if (pts.size() == 3 && pts[1] == p) found.push_back(id);
        }
        if (found.empty()) fail("no angle at point " + p);
        if (found.size() > 1) fail("Angle(" + p + ") is ambiguous: several angles at " + p);
        return found[0];
    }

    int ensure_arc_term(const Expr& e) {
        if (e->op != ExprOp::Call || e->sym != "Arc") {
            fail("expected Arc(...), got " + to_string(e));
        }
        if (e->args.size() == 2) return ensure_arc(ident(e->args[0]), ident(e->args[1]));
        // Arc(A, B, O): endpoints plus owning circle center
        int arc = ensure_arc(ident(e->args[0]), ident(e->args[1]));
        int circle = ensure_circle(ident(e->args[2]));
        out_.hologram.add_edge(arc, circle, EdgeKind::Adjacent);
        return arc;
    }

    int ensure_shape_term(const Expr& e) {
        if (e->op != ExprOp::Call) fail("expected a shape, got " + to_string(e));
        if (e->sym == "Circle") return ensure_circle_term(e);
        if (e->sym == "Line") return ensure_line_term(e);
        if (e->sym == "Angle") return ensure_angle_term(e);
        if (e->sym == "Arc") return ensure_arc_term(e);
        std::vector<std::string> pts;
        for (const auto& a : e->args) pts.push_back(ident(a));
        return ensure_polygon(pts);
    }

    // --- finalization passes -----------------------------------------------------

    void finalize_collinear_chains() {
        for (const auto& [line, pts] : on_line_) {
            if (pts.size() < 3) continue;
            std::vector<std::string> ordered = order_along_line(line, pts);
            // consecutive sub-segments, each a constituent of the parent
            std::vector<int> segs;
            for (std::size_t i = 0; i + 1 < ordered.size(); ++i) {
                int seg = ensure_line(ordered[i], ordered[i + 1]);
                if (seg != line) out_.hologram.add_edge(seg, line, EdgeKind::Adjacent);
                segs.push_back(seg);
            }
            Expr sum = ex::var(attr_var(segs[0], Slot::Length));
            for (std::size_t i = 1; i < segs.size(); ++i) {
                sum = ex::add(sum, ex::var(attr_var(segs[i], Slot::Length)));
            }
            seed(sum, ex::var(attr_var(line, Slot::Length)));
            // referenced longer spans also get their length-sum equation
            for (std::size_t i = 0; i + 2 < ordered.size(); ++i) {
                for (std::size_t j = i + 2; j < ordered.size(); ++j) {
                    if (i == 0 && j + 1 == ordered.size()) continue;  // the parent itself
                    auto it = lines_.find(canon_line_name(ordered[i], ordered[j]));
                    if (it == lines_.end()) continue;
                    Expr span_sum = ex::var(attr_var(segs[i], Slot::Length));
                    for (std::size_t k = i + 1; k < j; ++k) {
                        span_sum = ex::add(span_sum, ex::var(attr_var(segs[k], Slot::Length)));
                    }
                    seed(span_sum, ex::var(attr_var(it->second, Slot::Length)));
                }
            }
        }
    }

    std::vector<std::string> order_along_line(int line, const std::set<std::string>& pts) {
        const auto& coords = out_.input.point_coords;
        bool have_coords = true;
        for (const auto& p : pts) have_coords = have_coords && coords.count(p) > 0;
        std::vector<std::string> ordered(pts.begin(), pts.end());
        if (!have_coords) {
            out_.diagnostics.push_back("collinear points on " +
                                       out_.hologram.vertex(line).name +
                                       " ordered by name: coordinates missing");
            return ordered;  // set order = lexicographic
        }
        const auto& ends = out_.vertex_points.at(line);
        auto [x0, y0] = coords.at(ends[0]);
        auto [x1, y1] = coords.at(ends[1]);
        double dx = x1 - x0, dy = y1 - y0;
        std::stable_sort(ordered.begin(), ordered.end(), [&](const auto& a, const auto& b) {
            auto [ax, ay] = coords.at(a);
            auto [bx, by] = coords.at(b);
            return (ax - x0) * dx + (ay - y0) * dy < (bx - x0) * dx + (by - y0) * dy;
        });
        return ordered;
    }

    void finalize_circles() {
        for (const auto& [circle, pts] : on_circle_) {
            const std::string center = out_.vertex_points.at(circle)[0];
            for (const auto& p : pts) {
                auto it = lines_.find(canon_line_name(center, p));
                if (it == lines_.end()) continue;
                seed(ex::var(attr_var(it->second, Slot::Length)),
                     ex::var(attr_var(circle, Slot::Radius)));
            }
        }
        // attach dangling arcs to the problem's single circle, if unambiguous
        for (const auto& [key, arc] : arcs_) {
            if (!out_.hologram.neighbors(arc, EdgeKind::Adjacent).empty()) continue;
            if (circles_.size() == 1) {
                out_.hologram.add_edge(arc, circles_.begin()->second, EdgeKind::Adjacent);
            } else {
                fail("arc " + out_.hologram.vertex(arc).name +
                     " has no owning circle (found " + std::to_string(circles_.size()) +
                     " circles)");
            }
        }
    }

    // --- algebraic literals --------------------------------------------------------

    // Translates a value term (MeasureOf(...), LengthOf(...), arithmetic over
    // them, symbolic unknowns) into an engine expression.
    Expr value_expr(const Expr& e) {
        switch (e->op) {
            case ExprOp::Num:
                return e;
            case ExprOp::Sym:
                if (e->sym == "pi") return ex::num(kPi);
                return ex::var(literal_var(e->sym));
            case ExprOp::Var:
                return e;
            case ExprOp::Neg:
                return ex::neg(value_expr(e->args[0]));
            case ExprOp::Add:
            case ExprOp::Sub:
            case ExprOp::Mul:
            case ExprOp::Div:
            case ExprOp::Pow:
                return ex::binary(e->op, value_expr(e->args[0]), value_expr(e->args[1]));
            case ExprOp::Call:
                break;
        }
        const std::string& f = e->sym;
        if (f == "LengthOf") {
            const Expr& a = e->args[0];
            if (a->op == ExprOp::Call && a->sym == "Arc") {
                return ex::var(attr_var(ensure_arc_term(a), Slot::Length));
            }
            return ex::var(attr_var(ensure_line_term(a), Slot::Length));
        }
        if (f == "MeasureOf") {
            const Expr& a = e->args[0];
            if (a->op == ExprOp::Call && a->sym == "Arc") {
                return ex::var(attr_var(ensure_arc_term(a), Slot::ArcMeasure));
            }
            return ex::var(attr_var(ensure_angle_term(a), Slot::AngleMeasure));
        }
        if (f == "AreaOf") return ex::var(attr_var(ensure_shape_term(e->args[0]), Slot::Area));
        if (f == "PerimeterOf" || f == "CircumferenceOf") {
            return ex::var(attr_var(ensure_shape_term(e->args[0]), Slot::Perimeter));
        }
        if (f == "RadiusOf") {
            return ex::var(attr_var(ensure_circle_term(e->args[0]), Slot::Radius));
        }
        if (f == "DiameterOf") {
            return ex::mul(ex::num(2),
                           ex::var(attr_var(ensure_circle_term(e->args[0]), Slot::Radius)));
        }
        if (f == "RatioOf") return ex::div(value_expr(e->args[0]), value_expr(e->args[1]));
        if (f == "Add") {
            Expr s = value_expr(e->args[0]);
            for (std::size_t i = 1; i < e->args.size(); ++i) {
                s = ex::add(s, value_expr(e->args[i]));
            }
            return s;
        }
        if (f == "Sub") return ex::sub(value_expr(e->args[0]), value_expr(e->args[1]));
        if (f == "Mul") {
            Expr s = value_expr(e->args[0]);
            for (std::size_t i = 1; i < e->args.size(); ++i) {
                s = ex::mul(s, value_expr(e->args[i]));
            }
            return s;
        }
        if (f == "Div") return ex::div(value_expr(e->args[0]), value_expr(e->args[1]));
        if (f == "Pow") return ex::pow(value_expr(e->args[0]), value_expr(e->args[1]));
        if (f == "SqrtOf") return ex::call("sqrt", {value_expr(e->args[0])});
        if (f == "HalfOf") return ex::div(value_expr(e->args[0]), ex::num(2));
        if (f == "SinOf") return ex::call("sin", {value_expr(e->args[0])});
        if (f == "CosOf") return ex::call("cos", {value_expr(e->args[0])});
        if (f == "TanOf") return ex::call("tan", {value_expr(e->args[0])});
        if (f == "sin" || f == "cos" || f == "tan" || f == "sqrt" || f == "abs") {
            return ex::call(f, {value_expr(e->args[0])});
        }
        fail("cannot use " + to_string(e) + " as a value");
        return nullptr;  // unreachable
    }

    void process_equals(const Literal& l) {
        Expr lhs = value_expr(l.args[0]);
        Expr rhs = value_expr(l.args[1]);
        // directly resolvable: one side a bare attribute, other side constant
        auto direct = [&](const Expr& attr, const Expr& val) -> bool {
            if (attr->op != ExprOp::Var) return false;
            auto slot = out_.hologram.slot_of_var(attr->var);
            if (!slot) return false;  // a literal variable, not an attribute
            auto v = eval_const(val);
            if (!v) return false;
            out_.hologram.resolve_attr(slot->first, slot->second, *v);
            out_.equations.bind(attr->var, *v);
            return true;
        };
        if (direct(lhs, rhs) || direct(rhs, lhs)) return;
        seed(lhs, rhs);
    }

    void process_find(const Literal& l) {
        Target t;
        Expr e = value_expr(l.args[0]);
        if (e->op == ExprOp::Var) {
            auto slot = out_.hologram.slot_of_var(e->var);
            if (slot) {
                t.kind = Target::ValueOf;
                t.vertex = slot->first;
                t.slot = slot->second;
                out_.hologram.set_target(t);
                return;
            }
        }
        t.kind = Target::ExpressionOf;
        t.expression = e;
        out_.hologram.set_target(t);
    }

    // --- visual attributes ------------------------------------------------------

    void derive_visual_attrs() {
        const auto& coords = out_.input.point_coords;
        Hologram& h = out_.hologram;
        auto pos = [&](const std::string& name) -> std::optional<std::pair<double, double>> {
            auto it = coords.find(name);
            if (it == coords.end()) return std::nullopt;
            return it->second;
        };
        for (int id = 0; id < h.vertex_count(); ++id) {
            Vertex& v = h.vertex_mut(id);
            auto meta = out_.vertex_points.find(id);
            if (meta == out_.vertex_points.end()) continue;
            const auto& pts = meta->second;
            switch (v.kind.tag) {
                case VertexKind::Point: {
                    if (auto p = pos(pts[0])) {
                        v.visual.x = p->first;
                        v.visual.y = p->second;
                    }
                    break;
                }
                case VertexKind::Line: {
                    auto a = pos(pts[0]), b = pos(pts[1]);
                    if (!a || !b) break;
                    double dx = b->first - a->first, dy = b->second - a->second;
                    double len = std::hypot(dx, dy);
                    if (len < 1e-9) {
                        out_.diagnostics.push_back("degenerate line " + v.name +
                                                   ": coincident endpoints");
                        break;
                    }
                    v.visual.measure = len;
                    double dir = std::atan2(dy, dx) * 180.0 / kPi;
                    if (dir < 0) dir += 180.0;
                    if (dir >= 180.0) dir -= 180.0;
                    v.visual.direction = dir;
                    break;
                }
                case VertexKind::Angle: {
                    if (pts.size() != 3) break;  // labeled angle: no geometry
                    auto a = pos(pts[0]), b = pos(pts[1]), c = pos(pts[2]);
                    if (!a || !b || !c) break;
                    double ux = a->first - b->first, uy = a->second - b->second;
                    double vx = c->first - b->first, vy = c->second - b->second;
                    double nu = std::hypot(ux, uy), nv = std::hypot(vx, vy);
                    if (nu < 1e-9 || nv < 1e-9) {
                        out_.diagnostics.push_back("degenerate angle " + v.name +
                                                   ": zero-length side");
                        break;
                    }
                    double cosv = std::clamp((ux * vx + uy * vy) / (nu * nv), -1.0, 1.0);
                    v.visual.measure = std::acos(cosv) * 180.0 / kPi;
                    break;
                }
                case VertexKind::Arc: {
                    auto owners = h.neighbors(id, EdgeKind::Adjacent);
                    if (owners.empty()) break;
                    const auto& center_pts = out_.vertex_points.at(owners[0]);
                    auto o = pos(center_pts[0]);
                    auto a = pos(pts[0]), b = pos(pts[1]);
                    if (!o || !a || !b) break;
                    double ux = a->first - o->first, uy = a->second - o->second;
                    double vx = b->first - o->first, vy = b->second - o->second;
                    double nu = std::hypot(ux, uy), nv = std::hypot(vx, vy);
                    if (nu < 1e-9 || nv < 1e-9) break;
                    double cosv = std::clamp((ux * vx + uy * vy) / (nu * nv), -1.0, 1.0);
                    v.visual.measure = std::acos(cosv) * 180.0 / kPi;
                    break;
                }
                default:
                    break;
            }
        }
    }

    // --- misc ---------------------------------------------------------------------

    void seed(Expr lhs, Expr rhs) {
        out_.equations.add_equations({make_equation(std::move(lhs), std::move(rhs), "seed")});
    }

    void resolve(int vertex, Slot slot, double value) {
        int var = attr_var(vertex, slot);
        out_.hologram.resolve_attr(vertex, slot, value);
        out_.equations.bind(var, value);
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ValidationError({"problem " + out_.input.id + ": " + msg});
    }

    BuiltProblem out_;
    std::map<std::string, int> points_;
    std::map<std::string, int> lines_;
    std::map<std::string, int> angles_;
    std::map<std::string, int> circles_;
    std::map<std::string, int> polygons_;
    std::map<std::string, int> arcs_;
    std::map<std::string, int> literal_vars_;
    std::map<int, std::set<std::string>> on_line_;
    std::map<int, std::set<std::string>> on_circle_;
};

inline BuiltProblem build_hologram(const ProblemInput& input) {
    return HologramBuilder(input).build();
}

}  // namespace holo
