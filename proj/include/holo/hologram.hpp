#pragma once

// Heterogeneous attributed graph over geometric primitives. The same
// structure backs both the per-problem global graph and the small pattern
// graphs used by graph models.
//
// Vertices carry a kind (Point, Line, Angle, Arc, Circle, Polygon(n)), a map
// of mathematical attribute slots (each slot is either a known value or an
// unresolved engine variable), and diagram-derived visual attributes that
// never take part in algebraic reasoning. Edges are undirected, typed, and
// stored once in canonical (min,max) order; a pair of vertices may carry
// several edge kinds at once.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "holo/error.hpp"
#include "holo/expr.hpp"

namespace holo {

// ---------------------------------------------------------------------------
// Kinds and slots
// ---------------------------------------------------------------------------

struct VertexKind {
    enum Tag : std::uint8_t { Point, Line, Angle, Arc, Circle, Polygon };

    Tag tag = Point;
    int arity = 0;  // Polygon only, >= 3

    static VertexKind point() { return {Point, 0}; }
    static VertexKind line() { return {Line, 0}; }
    static VertexKind angle() { return {Angle, 0}; }
    static VertexKind arc() { return {Arc, 0}; }
    static VertexKind circle() { return {Circle, 0}; }
    static VertexKind polygon(int n) {
        if (n < 3) throw Error("polygon arity must be >= 3");
        return {Polygon, n};
    }

    bool operator==(const VertexKind& o) const { return tag == o.tag && arity == o.arity; }
    bool operator!=(const VertexKind& o) const { return !(*this == o); }
    bool operator<(const VertexKind& o) const {
        return tag != o.tag ? tag < o.tag : arity < o.arity;
    }

    // dense code for GRF labels and feature vectors
    int code() const { return tag == Polygon ? 8 + (arity - 3) : (int)tag; }
};

inline std::string to_string(VertexKind k) {
    switch (k.tag) {
        case VertexKind::Point: return "Point";
        case VertexKind::Line: return "Line";
        case VertexKind::Angle: return "Angle";
        case VertexKind::Arc: return "Arc";
        case VertexKind::Circle: return "Circle";
        case VertexKind::Polygon: return "Polygon" + std::to_string(k.arity);
    }
    return "?";
}

inline std::optional<VertexKind> vertex_kind_from_string(const std::string& s) {
    if (s == "Point") return VertexKind::point();
    if (s == "Line") return VertexKind::line();
    if (s == "Angle") return VertexKind::angle();
    if (s == "Arc") return VertexKind::arc();
    if (s == "Circle") return VertexKind::circle();
    if (s == "Triangle") return VertexKind::polygon(3);
    if (s == "Quad" || s == "Quadrilateral") return VertexKind::polygon(4);
    if (s.rfind("Polygon", 0) == 0 && s.size() > 7) {
        try {
            int n = std::stoi(s.substr(7));
            if (n >= 3) return VertexKind::polygon(n);
        } catch (const std::exception&) {
        }
    }
    return std::nullopt;
}

enum class EdgeKind : std::uint8_t {
    Adjacent,       // composite primitive <-> constituent (polygon/side, angle/side, arc/circle)
    Incident,       // point-on-primitive contact
    Parallel,
    Perpendicular,
    Similar,
    Congruent,
};

constexpr int kEdgeKindCount = 6;

inline std::string to_string(EdgeKind k) {
    switch (k) {
        case EdgeKind::Adjacent: return "Adjacent";
        case EdgeKind::Incident: return "Incident";
        case EdgeKind::Parallel: return "Parallel";
        case EdgeKind::Perpendicular: return "Perpendicular";
        case EdgeKind::Similar: return "Similar";
        case EdgeKind::Congruent: return "Congruent";
    }
    return "?";
}

inline std::optional<EdgeKind> edge_kind_from_string(const std::string& s) {
    if (s == "Adjacent") return EdgeKind::Adjacent;
    if (s == "Incident") return EdgeKind::Incident;
    if (s == "Parallel") return EdgeKind::Parallel;
    if (s == "Perpendicular") return EdgeKind::Perpendicular;
    if (s == "Similar") return EdgeKind::Similar;
    if (s == "Congruent") return EdgeKind::Congruent;
    return std::nullopt;
}

enum class Slot : std::uint8_t { Length, AngleMeasure, ArcMeasure, Radius, Area, Perimeter };

constexpr int kSlotCount = 6;

inline std::string to_string(Slot s) {
    switch (s) {
        case Slot::Length: return "Length";
        case Slot::AngleMeasure: return "AngleMeasure";
        case Slot::ArcMeasure: return "ArcMeasure";
        case Slot::Radius: return "Radius";
        case Slot::Area: return "Area";
        case Slot::Perimeter: return "Perimeter";
    }
    return "?";
}

inline std::optional<Slot> slot_from_string(const std::string& s) {
    if (s == "Length") return Slot::Length;
    if (s == "AngleMeasure") return Slot::AngleMeasure;
    if (s == "ArcMeasure") return Slot::ArcMeasure;
    if (s == "Radius") return Slot::Radius;
    if (s == "Area") return Slot::Area;
    if (s == "Perimeter") return Slot::Perimeter;
    return std::nullopt;
}

// Which slots make sense on which vertex kind.
inline bool slot_valid_for(Slot s, VertexKind k) {
    switch (k.tag) {
        case VertexKind::Point: return false;
        case VertexKind::Line: return s == Slot::Length;
        case VertexKind::Angle: return s == Slot::AngleMeasure;
        case VertexKind::Arc: return s == Slot::ArcMeasure || s == Slot::Length;
        case VertexKind::Circle:
            return s == Slot::Radius || s == Slot::Area || s == Slot::Perimeter;
        case VertexKind::Polygon: return s == Slot::Area || s == Slot::Perimeter;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Attributes
// ---------------------------------------------------------------------------

// Tolerance for "two known values agree".
constexpr double kAttrTol = 1e-6;

struct MathAttr {
    int var = -1;                 // engine variable backing this slot
    std::optional<double> value;  // set once the value is established

    bool known() const { return value.has_value(); }
};

struct VisualAttr {
    std::optional<double> x, y;        // Point position
    std::optional<double> measure;     // Line: length; Angle/Arc: degrees
    std::optional<double> direction;   // Line orientation, degrees in [0, 180)

    bool has_position() const { return x.has_value() && y.has_value(); }
};

struct Target {
    enum Kind { None, ValueOf, ExpressionOf };

    Kind kind = None;
    int vertex = -1;              // ValueOf
    Slot slot = Slot::Length;     // ValueOf
    Expr expression;              // ExpressionOf, over engine variables

    bool empty() const { return kind == None; }
};

struct Vertex {
    int id = -1;
    VertexKind kind;
    std::string name;  // canonical primitive name, e.g. "AB" or "ABC"
    std::map<Slot, MathAttr> attrs;
    VisualAttr visual;
};

struct Edge {
    int u = -1;
    int v = -1;
    EdgeKind kind = EdgeKind::Adjacent;

    bool operator<(const Edge& o) const {
        if (u != o.u) return u < o.u;
        if (v != o.v) return v < o.v;
        return kind < o.kind;
    }
    bool operator==(const Edge& o) const { return u == o.u && v == o.v && kind == o.kind; }
};

// ---------------------------------------------------------------------------
// Hologram
// ---------------------------------------------------------------------------

class Hologram {
public:
    // --- construction -------------------------------------------------------

    int add_vertex(VertexKind kind, std::string name = "") {
        Vertex v;
        v.id = (int)vertices_.size();
        v.kind = kind;
        v.name = name.empty() ? to_string(kind) + "#" + std::to_string(v.id) : std::move(name);
        vertices_.push_back(std::move(v));
        adjacency_.emplace_back();
        return vertices_.back().id;
    }

    // Adds the edge if absent. Idempotent; returns true when a new edge was
    // actually stored.
    bool add_edge(int u, int v, EdgeKind k) {
        check_vertex(u);
        check_vertex(v);
        if (u == v) {
            throw ValidationError({"self-loop on vertex " + std::to_string(u) + " (" +
                                   vertices_[u].name + ")"});
        }
        Edge e{std::min(u, v), std::max(u, v), k};
        if (!edges_.insert(e).second) return false;
        adjacency_[u].push_back({v, k});
        adjacency_[v].push_back({u, k});
        std::sort(adjacency_[u].begin(), adjacency_[u].end());
        std::sort(adjacency_[v].begin(), adjacency_[v].end());
        return true;
    }

    bool has_edge(int u, int v, EdgeKind k) const {
        if (u < 0 || v < 0 || u >= (int)vertices_.size() || v >= (int)vertices_.size()) {
            return false;
        }
        return edges_.count({std::min(u, v), std::max(u, v), k}) > 0;
    }

    // Distinct neighbor ids in ascending order, optionally restricted to one
    // edge kind.
    std::vector<int> neighbors(int v, std::optional<EdgeKind> k = std::nullopt) const {
        check_vertex(v);
        std::vector<int> out;
        for (const auto& [u, kind] : adjacency_[v]) {
            if (k && kind != *k) continue;
            if (out.empty() || out.back() != u) out.push_back(u);
        }
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    // --- attributes ---------------------------------------------------------

    // Returns the slot, creating it (with a fresh variable drawn from
    // next_var) on first access.
    MathAttr& attr(int v, Slot s, const std::function<int()>& next_var) {
        check_vertex(v);
        auto it = vertices_[v].attrs.find(s);
        if (it == vertices_[v].attrs.end()) {
            MathAttr a;
            a.var = next_var();
            it = vertices_[v].attrs.emplace(s, a).first;
            var_index_[a.var] = {v, s};
        }
        return it->second;
    }

    const MathAttr* find_attr(int v, Slot s) const {
        check_vertex(v);
        auto it = vertices_[v].attrs.find(s);
        return it == vertices_[v].attrs.end() ? nullptr : &it->second;
    }

    // Marks a slot's value as established. Re-resolving with a value within
    // kAttrTol of the existing one is a no-op; beyond that it is a conflict.
    // Returns true when the slot changed from unknown to known.
    bool resolve_attr(int v, Slot s, double value) {
        check_vertex(v);
        auto it = vertices_[v].attrs.find(s);
        if (it == vertices_[v].attrs.end()) {
            throw ValidationError({"vertex " + vertices_[v].name + " has no " + to_string(s) +
                                   " slot"});
        }
        MathAttr& a = it->second;
        if (a.value) {
            if (std::abs(*a.value - value) > kAttrTol) {
                throw ConflictError("conflicting value for " + to_string(s) + " of " +
                                    vertices_[v].name + ": " + std::to_string(*a.value) +
                                    " vs " + std::to_string(value));
            }
            return false;
        }
        bool angular = s == Slot::AngleMeasure || s == Slot::ArcMeasure;
        if (angular ? (value <= 0.0 || value >= 360.0) : value <= 0.0) {
            throw ConflictError("out-of-domain value " + std::to_string(value) + " for " +
                                to_string(s) + " of " + vertices_[v].name);
        }
        a.value = value;
        return true;
    }

    // Reverse lookup: which (vertex, slot) does an engine variable back?
    std::optional<std::pair<int, Slot>> slot_of_var(int var) const {
        auto it = var_index_.find(var);
        if (it == var_index_.end()) return std::nullopt;
        return it->second;
    }

    // --- access -------------------------------------------------------------

    const Vertex& vertex(int v) const {
        check_vertex(v);
        return vertices_[v];
    }
    Vertex& vertex_mut(int v) {
        check_vertex(v);
        return vertices_[v];
    }
    int vertex_count() const { return (int)vertices_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    const std::set<Edge>& edges() const { return edges_; }
    const std::vector<Vertex>& vertices() const { return vertices_; }

    void set_target(Target t) { target_ = std::move(t); }
    const Target& target() const { return target_; }

    // --- serialization ------------------------------------------------------

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["vertices"] = nlohmann::json::array();
        for (const auto& v : vertices_) {
            nlohmann::json jv;
            jv["id"] = v.id;
            jv["kind"] = to_string(v.kind);
            jv["name"] = v.name;
            nlohmann::json attrs = nlohmann::json::object();
            for (const auto& [slot, a] : v.attrs) {
                nlohmann::json ja;
                ja["var"] = a.var;
                if (a.value) ja["value"] = *a.value;
                attrs[to_string(slot)] = ja;
            }
            jv["attrs"] = attrs;
            nlohmann::json vis = nlohmann::json::object();
            if (v.visual.has_position()) {
                vis["x"] = *v.visual.x;
                vis["y"] = *v.visual.y;
            }
            if (v.visual.measure) vis["measure"] = *v.visual.measure;
            if (v.visual.direction) vis["direction"] = *v.visual.direction;
            jv["visual"] = vis;
            j["vertices"].push_back(jv);
        }
        j["edges"] = nlohmann::json::array();
        for (const auto& e : edges_) {
            j["edges"].push_back({e.u, e.v, to_string(e.kind)});
        }
        if (target_.kind == Target::ValueOf) {
            j["target"] = {{"kind", "value_of"},
                           {"vertex", target_.vertex},
                           {"slot", to_string(target_.slot)}};
        } else if (target_.kind == Target::ExpressionOf) {
            j["target"] = {{"kind", "expression_of"},
                           {"expression", to_string(target_.expression)}};
        }
        return j;
    }

    static Hologram from_json(const nlohmann::json& j) {
        Hologram h;
        for (const auto& jv : j.at("vertices")) {
            auto kind = vertex_kind_from_string(jv.at("kind").get<std::string>());
            if (!kind) throw ValidationError({"unknown vertex kind in hologram json"});
            int id = h.add_vertex(*kind, jv.at("name").get<std::string>());
            if (id != jv.at("id").get<int>()) {
                throw ValidationError({"non-dense vertex ids in hologram json"});
            }
            Vertex& v = h.vertices_[id];
            for (const auto& [key, ja] : jv.at("attrs").items()) {
                auto slot = slot_from_string(key);
                if (!slot) throw ValidationError({"unknown slot " + key});
                MathAttr a;
                a.var = ja.at("var").get<int>();
                if (ja.contains("value")) a.value = ja.at("value").get<double>();
                v.attrs[*slot] = a;
                h.var_index_[a.var] = {id, *slot};
            }
            const auto& vis = jv.at("visual");
            if (vis.contains("x")) {
                v.visual.x = vis.at("x").get<double>();
                v.visual.y = vis.at("y").get<double>();
            }
            if (vis.contains("measure")) v.visual.measure = vis.at("measure").get<double>();
            if (vis.contains("direction")) v.visual.direction = vis.at("direction").get<double>();
        }
        for (const auto& je : j.at("edges")) {
            auto kind = edge_kind_from_string(je.at(2).get<std::string>());
            if (!kind) throw ValidationError({"unknown edge kind in hologram json"});
            h.add_edge(je.at(0).get<int>(), je.at(1).get<int>(), *kind);
        }
        if (j.contains("target")) {
            const auto& jt = j.at("target");
            Target t;
            if (jt.at("kind") == "value_of") {
                t.kind = Target::ValueOf;
                t.vertex = jt.at("vertex").get<int>();
                auto slot = slot_from_string(jt.at("slot").get<std::string>());
                if (!slot) throw ValidationError({"unknown target slot"});
                t.slot = *slot;
            } else {
                t.kind = Target::ExpressionOf;
                t.expression = parse_expr(jt.at("expression").get<std::string>());
            }
            h.target_ = std::move(t);
        }
        return h;
    }

    // Plain-text integer-labeled vertex/edge list, one record per line:
    //   <n>
    //   <id> <kind-code>        (n lines)
    //   <m>
    //   <u> <v> <edge-code>     (m lines)
    std::string to_grf() const {
        std::string s;
        s += std::to_string(vertices_.size()) + "\n";
        for (const auto& v : vertices_) {
            s += std::to_string(v.id) + " " + std::to_string(v.kind.code()) + "\n";
        }
        s += std::to_string(edges_.size()) + "\n";
        for (const auto& e : edges_) {
            s += std::to_string(e.u) + " " + std::to_string(e.v) + " " +
                 std::to_string((int)e.kind) + "\n";
        }
        return s;
    }

private:
    void check_vertex(int v) const {
        if (v < 0 || v >= (int)vertices_.size()) {
            throw ValidationError({"unknown vertex id " + std::to_string(v)});
        }
    }

    std::vector<Vertex> vertices_;
    std::set<Edge> edges_;
    std::vector<std::vector<std::pair<int, EdgeKind>>> adjacency_;
    std::map<int, std::pair<int, Slot>> var_index_;
    Target target_;
};

}  // namespace holo
