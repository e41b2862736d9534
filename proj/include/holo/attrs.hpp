#pragma once

// Attribute-slot plumbing shared by the builder, the matcher and the
// reasoner: display names for slot variables and the slot addressed by a
// DSL reference like measure(a1) or length(s2).

#include <optional>
#include <string>

#include "holo/equation.hpp"
#include "holo/hologram.hpp"

namespace holo {

inline std::string attr_display_name(const Vertex& v, Slot slot) {
    switch (slot) {
        case Slot::Length:
            return v.kind.tag == VertexKind::Arc ? "arclen(" + v.name + ")"
                                                 : "|" + v.name + "|";
        case Slot::AngleMeasure: return "m∠" + v.name;
        case Slot::ArcMeasure: return "arc(" + v.name + ")";
        case Slot::Radius: return "radius(" + v.name + ")";
        case Slot::Area: return "area(" + v.name + ")";
        case Slot::Perimeter:
            return v.kind.tag == VertexKind::Circle ? "circumference(" + v.name + ")"
                                                    : "perimeter(" + v.name + ")";
    }
    return "?";
}

// Slot backing variable, created on first use with a readable name.
inline int ensure_attr_var(Hologram& h, VarTable& vars, int vertex, Slot slot) {
    const Vertex& v = h.vertex(vertex);
    if (!slot_valid_for(slot, v.kind)) {
        throw ValidationError({"slot " + to_string(slot) + " not valid for " +
                               to_string(v.kind) + " " + v.name});
    }
    std::string display = attr_display_name(v, slot);
    return h.attr(vertex, slot, [&] { return vars.fresh(display); }).var;
}

// Slot addressed by a constraint/template function name on a given kind.
inline std::optional<Slot> slot_for_ref(const std::string& fn, VertexKind kind) {
    if (fn == "length") {
        if (kind.tag == VertexKind::Line || kind.tag == VertexKind::Arc) return Slot::Length;
        return std::nullopt;
    }
    if (fn == "measure") {
        if (kind.tag == VertexKind::Angle) return Slot::AngleMeasure;
        if (kind.tag == VertexKind::Arc) return Slot::ArcMeasure;
        return std::nullopt;
    }
    if (fn == "area") {
        if (kind.tag == VertexKind::Polygon || kind.tag == VertexKind::Circle) {
            return Slot::Area;
        }
        return std::nullopt;
    }
    if (fn == "radius") {
        if (kind.tag == VertexKind::Circle) return Slot::Radius;
        return std::nullopt;
    }
    if (fn == "perimeter" || fn == "circumference") {
        if (kind.tag == VertexKind::Polygon || kind.tag == VertexKind::Circle) {
            return Slot::Perimeter;
        }
        return std::nullopt;
    }
    return std::nullopt;
}

inline bool is_attr_ref_fn(const std::string& fn) {
    return fn == "length" || fn == "measure" || fn == "area" || fn == "radius" ||
           fn == "perimeter" || fn == "circumference";
}

}  // namespace holo
