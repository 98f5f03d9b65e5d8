#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <sstream>

#include "treestack/topology.hpp"

using namespace treestack;

namespace {

void check_invariants(const Topology& t) {
    long long degreeSum = 0;
    for (int v = 0; v < t.vertexCount; ++v) {
        std::set<int> seen;
        for (int w : t.adjacency[v]) {
            CHECK(w != v);
            CHECK(seen.insert(w).second);
            const auto& back = t.adjacency[w];
            CHECK(std::binary_search(back.begin(), back.end(), v));
            if (t.layerOf[v] == t.layerOf[w]) {
                const auto& ca = t.coordAdj[t.treeCoordOf[v]];
                CHECK(std::binary_search(ca.begin(), ca.end(), t.treeCoordOf[w]));
            } else {
                CHECK(t.treeCoordOf[v] == t.treeCoordOf[w]);
            }
        }
        degreeSum += t.degree(v);
        const int cap = t.kind == TopologyKind::Tree ? t.K : t.K + 2;
        CHECK(t.degree(v) <= cap);
        CHECK(t.fullDegree(v) >= t.degree(v));
    }
    CHECK(degreeSum == 2 * t.edgeCount());
}

}  // namespace

TEST_CASE("tree ball sizes") {
    CHECK(build_topology(TopologyKind::Tree, 3, 1, 2).vertexCount == 10);
    const Topology point = build_topology(TopologyKind::Tree, 3, 1, 0);
    CHECK(point.vertexCount == 1);
    CHECK(point.edgeCount() == 0);
    // 1 + K + K(K-1) + ... per level
    CHECK(build_topology(TopologyKind::Tree, 4, 1, 3).vertexCount == 1 + 4 + 12 + 36);
}

TEST_CASE("stack construction") {
    const Topology s = build_topology(TopologyKind::StackFreeFinite, 3, 2, 2);
    CHECK(s.vertexCount == 20);
    CHECK(s.degree(s.vertexId(0, 0)) == 4);  // 3 in-layer + 1 vertical
    check_invariants(s);

    for (TopologyKind kind :
         {TopologyKind::StackInfinite, TopologyKind::StackFreeFinite,
          TopologyKind::StackPeriodicFinite, TopologyKind::StackSemiInfinite})
        for (int K : {3, 5})
            check_invariants(build_topology(kind, K, 4, 3));
}

TEST_CASE("periodic fibers") {
    // Width 2 collapses the doubled edge; the root's fiber has one vertical
    // edge and degree K+1 overall.
    const Topology p2 = build_topology(TopologyKind::StackPeriodicFinite, 3, 2, 2);
    CHECK(p2.degree(p2.vertexId(0, 0)) == 4);
    CHECK(p2.fullDegree(p2.vertexId(0, 0)) == 4);
    check_invariants(p2);

    const Topology p4 = build_topology(TopologyKind::StackPeriodicFinite, 3, 4, 1);
    // Each coordinate's fiber is a 4-cycle.
    for (int layer = 0; layer < 4; ++layer) {
        const int v = p4.vertexId(0, layer);
        int vertical = 0;
        for (int w : p4.adjacency[v])
            if (p4.layerOf[w] != layer) ++vertical;
        CHECK(vertical == 2);
    }
    check_invariants(p4);
}

TEST_CASE("degrees and boundaries") {
    const Topology s = build_topology(TopologyKind::StackInfinite, 5, 4, 3);
    // Clipped extreme layers report ghost vertical neighbors.
    CHECK(s.layerClipped(0));
    CHECK(s.layerClipped(3));
    CHECK(!s.layerClipped(1));
    CHECK(s.ghostCount(s.vertexId(0, 0)) == 1);
    CHECK(s.ghostCount(s.vertexId(0, 1)) == 0);
    // Radius-R coordinates are boundary and miss K-1 in-tree neighbors.
    const int leafCoord = s.treeVertexCount - 1;
    CHECK(s.isBoundary[s.vertexId(leafCoord, 1)]);
    CHECK(s.ghostCount(s.vertexId(leafCoord, 1)) == 4);

    const Topology wide = build_topology(TopologyKind::StackInfinite, 5, 6, 3);
    CHECK(wide.isInterior(wide.vertexId(0, 2)));
    CHECK(!wide.isInterior(wide.vertexId(0, 1)));  // margin 2 from clipped layer 0
    CHECK(!wide.isInterior(wide.vertexId(wide.treeVertexCount - 1, 2)));
    CHECK(wide.isInterior(wide.vertexId(0, 1), 1));

    const Topology semi = build_topology(TopologyKind::StackSemiInfinite, 3, 3, 2);
    CHECK(!semi.layerClipped(0));  // genuine bottom layer
    CHECK(semi.layerClipped(2));
    CHECK(semi.fullVerticalDegree(0) == 1);
    CHECK(semi.isInterior(semi.vertexId(0, 0)));
    check_invariants(semi);
}

TEST_CASE("constructor validation") {
    CHECK_THROWS_AS(build_topology(TopologyKind::Tree, 2, 1, 2), std::invalid_argument);
    CHECK_THROWS_AS(build_topology(TopologyKind::Tree, 3, 2, 2), std::invalid_argument);
    CHECK_THROWS_AS(build_topology(TopologyKind::StackFreeFinite, 3, 0, 2),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_topology(TopologyKind::StackPeriodicFinite, 3, 1, 2),
                    std::invalid_argument);
}

TEST_CASE("branch regions") {
    const Topology ball = build_topology(TopologyKind::Tree, 3, 1, 2);
    const int c1 = ball.coordAdj[0][0];

    // Deleting c1 removes its whole 3-vertex branch: root, the two other
    // children, and their four grandchildren remain.
    const BranchRegion r1 = branch_region(ball, 0, {c1});
    CHECK(r1.members.size() == 7);
    CHECK(r1.clipped);

    const BranchRegion r2 = branch_region(ball, 0, {ball.coordAdj[0][0], ball.coordAdj[0][1]});
    CHECK(r2.members.size() == 4);

    // branch_region(x,{y}) and branch_region(y,{x}) partition the ball.
    const BranchRegion other = branch_region(ball, c1, {0});
    CHECK(r1.members.size() + other.members.size() ==
          static_cast<std::size_t>(ball.vertexCount));
    std::vector<int> inter;
    std::set_intersection(r1.members.begin(), r1.members.end(), other.members.begin(),
                          other.members.end(), std::back_inserter(inter));
    CHECK(inter.empty());

    const Topology point = build_topology(TopologyKind::Tree, 3, 1, 0);
    CHECK_THROWS_AS(branch_region(point, 0, {0}), std::invalid_argument);
    CHECK_THROWS_AS(branch_region(ball, 0, {ball.vertexCount - 1}), std::invalid_argument);
    CHECK_THROWS_AS(branch_region(build_topology(TopologyKind::StackFreeFinite, 3, 2, 2), 0, {1}),
                    std::invalid_argument);
}

TEST_CASE("self-avoiding paths") {
    const Topology stack = build_topology(TopologyKind::StackInfinite, 3, 4, 5);
    const int origin = stack.vertexId(0, 1);
    CHECK(self_avoiding_path_count(stack, origin, 0) == 1);
    CHECK(self_avoiding_path_count(stack, origin, 1) == 5);  // K+2
    CHECK(self_avoiding_path_count(stack, origin, 3) <= 5 * 4 * 4);
    CHECK_THROWS_AS(self_avoiding_path_count(stack, origin, 13), std::invalid_argument);
}

TEST_CASE("edge list export") {
    const Topology ball = build_topology(TopologyKind::Tree, 3, 1, 1);
    std::ostringstream out;
    ball.exportEdgeList(out);
    CHECK(out.str() == "# tree 3 1 1\n0 1\n0 2\n0 3\n");
}

TEST_CASE("kind strings round-trip") {
    for (TopologyKind kind :
         {TopologyKind::Tree, TopologyKind::StackInfinite, TopologyKind::StackFreeFinite,
          TopologyKind::StackPeriodicFinite, TopologyKind::StackSemiInfinite})
        CHECK(topology_kind_from_string(to_string(kind)) == kind);
    CHECK_THROWS_AS(topology_kind_from_string("torus"), std::invalid_argument);
}
