#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "holo/equation.hpp"
#include "holo/hologram.hpp"

using namespace holo;

namespace {

std::function<int()> var_source(VarTable& vars, const std::string& prefix = "v") {
    return [&vars, prefix]() { return vars.fresh(prefix + std::to_string(vars.size())); };
}

}  // namespace

TEST_CASE("vertices get dense ids and fresh slot variables") {
    VarTable vars;
    Hologram h;
    CHECK(h.add_vertex(VertexKind::point(), "A") == 0);
    CHECK(h.vertex_count() == 1);
    CHECK(h.edge_count() == 0);

    int l = h.add_vertex(VertexKind::line(), "AB");
    CHECK(l == 1);
    auto next = var_source(vars);
    MathAttr& len = h.attr(l, Slot::Length, next);
    CHECK_FALSE(len.known());
    h.resolve_attr(l, Slot::Length, 4.0);
    CHECK(h.find_attr(l, Slot::Length)->value.value() == 4.0);

    int a = h.add_vertex(VertexKind::angle(), "BAC");
    MathAttr& m = h.attr(a, Slot::AngleMeasure, next);
    CHECK_FALSE(m.known());
    CHECK(m.var != len.var);
    CHECK(h.slot_of_var(m.var).value() == std::pair(a, Slot::AngleMeasure));
}

TEST_CASE("edges are symmetric and idempotent") {
    Hologram h;
    int p = h.add_vertex(VertexKind::point(), "P1");
    int l = h.add_vertex(VertexKind::line(), "L1");
    CHECK(h.add_edge(p, l, EdgeKind::Incident));
    CHECK(h.has_edge(l, p, EdgeKind::Incident));
    CHECK(h.has_edge(p, l, EdgeKind::Incident));
    CHECK_FALSE(h.add_edge(l, p, EdgeKind::Incident));  // duplicate, either direction
    CHECK(h.edge_count() == 1);
    CHECK_THROWS_AS(h.add_edge(p, p, EdgeKind::Adjacent), ValidationError);
    CHECK_THROWS_AS(h.add_edge(p, 99, EdgeKind::Adjacent), ValidationError);
}

TEST_CASE("multiple kinds may connect the same pair") {
    Hologram h;
    int a = h.add_vertex(VertexKind::line(), "AB");
    int b = h.add_vertex(VertexKind::line(), "CD");
    CHECK(h.add_edge(a, b, EdgeKind::Adjacent));
    CHECK(h.add_edge(a, b, EdgeKind::Parallel));
    CHECK(h.edge_count() == 2);
    CHECK(h.neighbors(a).size() == 1);  // distinct neighbor ids
    CHECK(h.neighbors(a, EdgeKind::Parallel) == std::vector<int>{b});
}

TEST_CASE("neighbors come back ascending and filtered") {
    Hologram h;
    int center = h.add_vertex(VertexKind::point(), "O");
    std::vector<int> leaves;
    for (int i = 0; i < 5; ++i) {
        leaves.push_back(h.add_vertex(VertexKind::line(), "L" + std::to_string(i)));
    }
    // insert out of order
    h.add_edge(center, leaves[3], EdgeKind::Incident);
    h.add_edge(center, leaves[0], EdgeKind::Incident);
    h.add_edge(center, leaves[4], EdgeKind::Incident);
    h.add_edge(center, leaves[1], EdgeKind::Incident);
    h.add_edge(center, leaves[2], EdgeKind::Incident);
    CHECK(h.neighbors(center) == leaves);
    CHECK(h.neighbors(leaves[0]) == std::vector<int>{center});
    int isolated = h.add_vertex(VertexKind::circle(), "C");
    CHECK(h.neighbors(isolated).empty());
    CHECK(h.neighbors(center, EdgeKind::Parallel).empty());
    CHECK_THROWS_AS(h.neighbors(42), ValidationError);
}

TEST_CASE("resolve_attr applies the conflict tolerance") {
    VarTable vars;
    Hologram h;
    int l = h.add_vertex(VertexKind::line(), "AB");
    h.attr(l, Slot::Length, var_source(vars));
    CHECK(h.resolve_attr(l, Slot::Length, 5.0));
    CHECK_FALSE(h.resolve_attr(l, Slot::Length, 5.0000001));  // within 1e-6: accepted, unchanged
    CHECK(h.find_attr(l, Slot::Length)->value.value() == 5.0);
    CHECK_THROWS_AS(h.resolve_attr(l, Slot::Length, 6.0), ConflictError);
    CHECK_THROWS_AS(h.resolve_attr(l, Slot::AngleMeasure, 1.0), ValidationError);
}

TEST_CASE("edge symmetry holds on random graphs") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        Hologram h;
        int n = 2 + (int)(rng() % 8);
        for (int i = 0; i < n; ++i) {
            h.add_vertex(rng() % 2 ? VertexKind::point() : VertexKind::line());
        }
        for (int e = 0; e < n * 2; ++e) {
            int u = (int)(rng() % n);
            int v = (int)(rng() % n);
            if (u == v) continue;
            auto k = (EdgeKind)(rng() % kEdgeKindCount);
            h.add_edge(u, v, k);
        }
        for (const auto& e : h.edges()) {
            CHECK(h.has_edge(e.v, e.u, e.kind));
            auto nb = h.neighbors(e.u);
            CHECK(std::find(nb.begin(), nb.end(), e.v) != nb.end());
        }
    }
}

TEST_CASE("json round trip preserves structure, attributes and target") {
    VarTable vars;
    Hologram h;
    int a = h.add_vertex(VertexKind::point(), "A");
    int l = h.add_vertex(VertexKind::line(), "AB");
    int g = h.add_vertex(VertexKind::angle(), "ABC");
    int t = h.add_vertex(VertexKind::polygon(3), "ABC");
    h.add_edge(a, l, EdgeKind::Incident);
    h.add_edge(l, t, EdgeKind::Adjacent);
    h.add_edge(g, l, EdgeKind::Adjacent);
    auto next = var_source(vars);
    h.attr(l, Slot::Length, next);
    h.resolve_attr(l, Slot::Length, 7.25);
    h.attr(g, Slot::AngleMeasure, next);
    h.vertex_mut(a).visual.x = 1.5;
    h.vertex_mut(a).visual.y = -2.0;
    h.vertex_mut(g).visual.measure = 60.0;
    Target tgt;
    tgt.kind = Target::ValueOf;
    tgt.vertex = g;
    tgt.slot = Slot::AngleMeasure;
    h.set_target(tgt);

    Hologram back = Hologram::from_json(h.to_json());
    CHECK(back.to_json() == h.to_json());
    CHECK(back.vertex_count() == h.vertex_count());
    CHECK(back.edge_count() == h.edge_count());
    CHECK(back.find_attr(l, Slot::Length)->value.value() == 7.25);
    CHECK(back.vertex(g).visual.measure.value() == 60.0);
    CHECK(back.target().kind == Target::ValueOf);
    CHECK(back.slot_of_var(back.find_attr(g, Slot::AngleMeasure)->var).value() ==
          std::pair(g, Slot::AngleMeasure));
}

TEST_CASE("grf export lists integer-labeled vertices and edges") {
    Hologram h;
    int p = h.add_vertex(VertexKind::point(), "A");
    int c = h.add_vertex(VertexKind::circle(), "O");
    int q = h.add_vertex(VertexKind::polygon(4), "ABCD");
    h.add_edge(p, c, EdgeKind::Incident);
    h.add_edge(p, q, EdgeKind::Adjacent);
    std::string grf = h.to_grf();
    CHECK(grf ==
          "3\n"
          "0 0\n"
          "1 4\n"
          "2 9\n"
          "2\n"
          "0 1 1\n"
          "0 2 0\n");
}

TEST_CASE("kind strings round trip") {
    for (const auto& k :
         {VertexKind::point(), VertexKind::line(), VertexKind::angle(), VertexKind::arc(),
          VertexKind::circle(), VertexKind::polygon(3), VertexKind::polygon(7)}) {
        CHECK(vertex_kind_from_string(to_string(k)).value() == k);
    }
    CHECK(vertex_kind_from_string("Triangle").value() == VertexKind::polygon(3));
    CHECK(vertex_kind_from_string("Quadrilateral").value() == VertexKind::polygon(4));
    CHECK_FALSE(vertex_kind_from_string("Blob").has_value());
    CHECK_THROWS_AS(VertexKind::polygon(2), Error);
    for (int i = 0; i < kEdgeKindCount; ++i) {
        auto k = (EdgeKind)i;
        CHECK(edge_kind_from_string(to_string(k)).value() == k);
    }
}
