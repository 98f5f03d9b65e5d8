#ifndef TREESTACK_TOPOLOGY_HPP
#define TREESTACK_TOPOLOGY_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace treestack {

enum class TopologyKind {
    Tree,                 // single layer of T_K, radius-R ball
    StackInfinite,        // finite window of T_K x Z (both extreme layers clipped)
    StackFreeFinite,      // T_K x {0..l-1}, free vertical boundaries
    StackPeriodicFinite,  // T_K x Z_l, vertical cycles
    StackSemiInfinite     // T_K x {0,1,...}, layer 0 genuine, top layer clipped
};

const char* to_string(TopologyKind kind);
TopologyKind topology_kind_from_string(const std::string& s);

// Finite truncation of one of the tree-stack graph families. Vertices are
// dense ids in layer-major order: id = layer * treeVertexCount + coord, where
// coords enumerate the radius-R ball of T_K breadth-first from the root.
// Immutable after construction; safe for shared concurrent reads.
struct Topology {
    TopologyKind kind = TopologyKind::Tree;
    int K = 3;
    int width = 1;   // layer count of the finite representation
    int radius = 0;  // in-layer truncation radius

    int treeVertexCount = 0;
    int vertexCount = 0;

    std::vector<std::vector<int>> adjacency;  // sorted neighbor lists
    std::vector<int> layerOf;
    std::vector<int> treeCoordOf;
    std::vector<char> isBoundary;  // tree distance == R, or clipped extreme layer

    // In-tree structure over coordinates (shared by all layers).
    std::vector<int> coordDepth;
    std::vector<int> coordParent;               // -1 for the root coord
    std::vector<std::vector<int>> coordAdj;     // sorted

    int vertexId(int coord, int layer) const { return layer * treeVertexCount + coord; }
    int degree(int v) const { return static_cast<int>(adjacency[v].size()); }

    // Vertical degree of a layer in the untruncated object.
    int fullVerticalDegree(int layer) const;
    // Degree the vertex would have in the untruncated object.
    int fullDegree(int v) const;
    // Number of neighbors lost to truncation (0 for genuine boundaries).
    int ghostCount(int v) const { return fullDegree(v) - degree(v); }

    // True when a layer exists only because the infinite object was clipped.
    bool layerClipped(int layer) const;

    // Vertices far enough from every truncation artifact that statistics on
    // them approximate the infinite-volume object.
    bool isInterior(int v, int margin = 2) const;

    long long edgeCount() const;
    void exportEdgeList(std::ostream& out) const;
};

Topology build_topology(TopologyKind kind, int K, int width, int radius);

// Connected component of `anchor` after deleting `exclusions` (1 or 2 of its
// neighbors), clipped at the truncation radius. In-layer object: only valid
// on Tree topologies.
struct BranchRegion {
    int anchor = -1;
    std::vector<int> excluded;
    std::vector<int> members;  // sorted vertex ids
    bool clipped = false;      // the radius-R boundary intersects the region
};

BranchRegion branch_region(const Topology& topo, int anchor, std::vector<int> exclusions);

// Exact self-avoiding path count (paths of exactly n edges from origin).
// Guarded exhaustive search: n must be <= kSelfAvoidingPathDepthGuard.
inline constexpr int kSelfAvoidingPathDepthGuard = 12;
long long self_avoiding_path_count(const Topology& topo, int origin, int n);

}  // namespace treestack

#endif
