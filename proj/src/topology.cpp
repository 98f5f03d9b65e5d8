#include "treestack/topology.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace treestack {

const char* to_string(TopologyKind kind) {
    switch (kind) {
        case TopologyKind::Tree: return "tree";
        case TopologyKind::StackInfinite: return "stack_infinite";
        case TopologyKind::StackFreeFinite: return "stack_free";
        case TopologyKind::StackPeriodicFinite: return "stack_periodic";
        case TopologyKind::StackSemiInfinite: return "stack_semi";
    }
    return "?";
}

TopologyKind topology_kind_from_string(const std::string& s) {
    if (s == "tree") return TopologyKind::Tree;
    if (s == "stack_infinite") return TopologyKind::StackInfinite;
    if (s == "stack_free") return TopologyKind::StackFreeFinite;
    if (s == "stack_periodic") return TopologyKind::StackPeriodicFinite;
    if (s == "stack_semi") return TopologyKind::StackSemiInfinite;
    throw std::invalid_argument("unknown topology kind: " + s);
}

int Topology::fullVerticalDegree(int layer) const {
    switch (kind) {
        case TopologyKind::Tree:
            return 0;
        case TopologyKind::StackInfinite:
            return 2;
        case TopologyKind::StackFreeFinite:
            if (width == 1) return 0;
            return (layer == 0 || layer == width - 1) ? 1 : 2;
        case TopologyKind::StackPeriodicFinite:
            // Width 2 collapses the doubled vertical edge into a single one.
            return width == 2 ? 1 : 2;
        case TopologyKind::StackSemiInfinite:
            return layer == 0 ? 1 : 2;
    }
    return 0;
}

int Topology::fullDegree(int v) const { return K + fullVerticalDegree(layerOf[v]); }

bool Topology::layerClipped(int layer) const {
    switch (kind) {
        case TopologyKind::StackInfinite:
            return layer == 0 || layer == width - 1;
        case TopologyKind::StackSemiInfinite:
            return layer == width - 1;
        default:
            return false;
    }
}

bool Topology::isInterior(int v, int margin) const {
    if (coordDepth[treeCoordOf[v]] > radius - margin) return false;
    const int layer = layerOf[v];
    switch (kind) {
        case TopologyKind::StackInfinite:
            return layer >= margin && layer <= width - 1 - margin;
        case TopologyKind::StackSemiInfinite:
            return layer <= width - 1 - margin;
        default:
            return true;  // genuine layers of the finite graphs
    }
}

long long Topology::edgeCount() const {
    long long deg = 0;
    for (const auto& nbrs : adjacency) deg += static_cast<long long>(nbrs.size());
    return deg / 2;
}

void Topology::exportEdgeList(std::ostream& out) const {
    out << "# " << to_string(kind) << " " << K << " " << width << " " << radius << "\n";
    for (int u = 0; u < vertexCount; ++u)
        for (int v : adjacency[u])
            if (u < v) out << u << " " << v << "\n";
}

Topology build_topology(TopologyKind kind, int K, int width, int radius) {
    if (K < 3) throw std::invalid_argument("tree degree K must be >= 3");
    if (width < 1) throw std::invalid_argument("width must be >= 1");
    if (radius < 0) throw std::invalid_argument("radius must be >= 0");
    if (kind == TopologyKind::Tree && width != 1)
        throw std::invalid_argument("tree topology has exactly one layer");
    if (kind == TopologyKind::StackPeriodicFinite && width < 2)
        throw std::invalid_argument("periodic stack requires width >= 2");

    Topology t;
    t.kind = kind;
    t.K = K;
    t.width = width;
    t.radius = radius;

    // Breadth-first ball of T_K: root has K children, deeper vertices K-1.
    t.coordDepth.push_back(0);
    t.coordParent.push_back(-1);
    int levelBegin = 0, levelEnd = 1;
    for (int d = 1; d <= radius; ++d) {
        const int nextBegin = static_cast<int>(t.coordDepth.size());
        for (int u = levelBegin; u < levelEnd; ++u) {
            const int children = (d == 1) ? K : K - 1;
            for (int c = 0; c < children; ++c) {
                t.coordDepth.push_back(d);
                t.coordParent.push_back(u);
            }
        }
        levelBegin = nextBegin;
        levelEnd = static_cast<int>(t.coordDepth.size());
    }
    t.treeVertexCount = static_cast<int>(t.coordDepth.size());
    t.vertexCount = t.treeVertexCount * width;

    t.coordAdj.assign(t.treeVertexCount, {});
    for (int u = 0; u < t.treeVertexCount; ++u) {
        if (t.coordParent[u] >= 0) {
            t.coordAdj[u].push_back(t.coordParent[u]);
            t.coordAdj[t.coordParent[u]].push_back(u);
        }
    }
    for (auto& nbrs : t.coordAdj) std::sort(nbrs.begin(), nbrs.end());

    t.adjacency.assign(t.vertexCount, {});
    t.layerOf.resize(t.vertexCount);
    t.treeCoordOf.resize(t.vertexCount);
    t.isBoundary.assign(t.vertexCount, 0);

    for (int layer = 0; layer < width; ++layer) {
        for (int u = 0; u < t.treeVertexCount; ++u) {
            const int v = t.vertexId(u, layer);
            t.layerOf[v] = layer;
            t.treeCoordOf[v] = u;
            t.isBoundary[v] = (t.coordDepth[u] == radius) || t.layerClipped(layer);
            for (int w : t.coordAdj[u]) t.adjacency[v].push_back(t.vertexId(w, layer));
        }
    }

    // Vertical edges: consecutive layers, plus the periodic wraparound.
    auto addVertical = [&](int la, int lb) {
        for (int u = 0; u < t.treeVertexCount; ++u) {
            const int a = t.vertexId(u, la);
            const int b = t.vertexId(u, lb);
            t.adjacency[a].push_back(b);
            t.adjacency[b].push_back(a);
        }
    };
    for (int layer = 0; layer + 1 < width; ++layer) addVertical(layer, layer + 1);
    if (kind == TopologyKind::StackPeriodicFinite && width >= 3) addVertical(width - 1, 0);

    for (auto& nbrs : t.adjacency) std::sort(nbrs.begin(), nbrs.end());
    return t;
}

BranchRegion branch_region(const Topology& topo, int anchor, std::vector<int> exclusions) {
    if (topo.kind != TopologyKind::Tree)
        throw std::invalid_argument("branch regions are in-layer objects on tree topologies");
    if (exclusions.empty() || exclusions.size() > 2)
        throw std::invalid_argument("need 1 or 2 exclusions");
    for (int e : exclusions) {
        const auto& nbrs = topo.adjacency[anchor];
        if (!std::binary_search(nbrs.begin(), nbrs.end(), e))
            throw std::invalid_argument("exclusion is not a neighbor of the anchor");
    }

    BranchRegion region;
    region.anchor = anchor;
    region.excluded = exclusions;

    std::vector<char> blocked(topo.vertexCount, 0);
    for (int e : exclusions) blocked[e] = 1;
    std::vector<char> seen(topo.vertexCount, 0);
    std::vector<int> stack{anchor};
    seen[anchor] = 1;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        region.members.push_back(v);
        if (topo.isBoundary[v]) region.clipped = true;
        for (int w : topo.adjacency[v])
            if (!seen[w] && !blocked[w]) {
                seen[w] = 1;
                stack.push_back(w);
            }
    }
    std::sort(region.members.begin(), region.members.end());
    return region;
}

namespace {

long long sawCount(const Topology& topo, std::vector<char>& onPath, int v, int remaining) {
    if (remaining == 0) return 1;
    long long total = 0;
    onPath[v] = 1;
    for (int w : topo.adjacency[v])
        if (!onPath[w]) total += sawCount(topo, onPath, w, remaining - 1);
    onPath[v] = 0;
    return total;
}

}  // namespace

long long self_avoiding_path_count(const Topology& topo, int origin, int n) {
    if (n < 0) throw std::invalid_argument("path length must be >= 0");
    if (n > kSelfAvoidingPathDepthGuard)
        throw std::invalid_argument("self-avoiding path length exceeds the depth guard");
    std::vector<char> onPath(topo.vertexCount, 0);
    return sawCount(topo, onPath, origin, n);
}

}  // namespace treestack
