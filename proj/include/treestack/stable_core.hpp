#ifndef TREESTACK_STABLE_CORE_HPP
#define TREESTACK_STABLE_CORE_HPP

#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

#include "treestack/dynamics.hpp"
#include "treestack/topology.hpp"

namespace treestack {

// Which stable structure to detect. SingleLayer is the per-layer (K-1)-core
// of +1 vertices; DoublyOpen pairs consecutive layers and requires both
// copies +1; TriplyOpen pairs all but the final three layers of an odd-width
// stack and requires all three copies +1 there.
enum class CoreVariant { SingleLayer, DoublyOpen, TriplyOpen };

// Free: pruning sees only surviving real neighbors (conservative subset of
// the infinite-graph object; empty on finite trees). Wildcard: radius-R
// vertices get credit for their missing in-tree neighbors, emulating an
// all-favorable exterior (one-sided from the other direction).
enum class CoreBoundaryMode { Free, Wildcard };

const char* to_string(CoreVariant v);
const char* to_string(CoreBoundaryMode m);
CoreVariant core_variant_from_string(const std::string& s);

struct StableCore {
    CoreVariant variant = CoreVariant::SingleLayer;
    CoreBoundaryMode boundaryMode = CoreBoundaryMode::Wildcard;
    std::vector<char> member;                     // indexed by vertex id
    std::map<int, std::vector<int>> perLayerPieces;  // layer -> sorted members

    std::vector<int> members() const;
    long long size() const;
    bool contains(int v) const { return member[v] != 0; }
};

// The +1 spin cluster of v: all vertices reachable from v through +1 spins.
// Empty (by convention) when sigma_v = -1.
std::vector<int> plus_cluster(const Topology& topo, const SpinConfiguration& config, int v);

StableCore compute_stable_core(const Topology& topo, const SpinConfiguration& config,
                               CoreVariant variant, CoreBoundaryMode boundaryMode);

struct CoreStabilityReport {
    struct Entry {
        int vertex;
        int guaranteed;  // +1 neighbors the core construction pins down
        int degree;      // degree used for the majority count
        int margin;      // 2*guaranteed - degree (Majority) or guaranteed - M0
    };
    bool stable = true;
    std::vector<Entry> violations;
    int minMargin = 0;
};

// Static check that every member's guaranteed +1 neighbor count wins under
// the rule. Wildcard cores are checked against the untruncated degrees (their
// ghosts are +1-clamped); free cores against the actual reduced degrees.
CoreStabilityReport verify_core_stability(const Topology& topo, const StableCore& core,
                                          const UpdateRule& rule);

struct Droplet {
    int id = 0;
    std::vector<int> members;  // sorted
    bool touchesBoundary = false;
    std::optional<double> eliminationTime;
};

// Connected components of the complement of the core.
std::vector<Droplet> droplet_decomposition(const Topology& topo, const StableCore& core);

// Fills eliminationTime: the first time after which every droplet member is
// permanently +1 within the run's horizon. Left unset when not eliminated.
void track_droplet_elimination(const DynamicsRun& run, std::vector<Droplet>& droplets);

// Collapses layer pairs (2i, 2i+1) by AND: projected spin +1 iff both copies
// are +1. Output lives on the half-resolution stack (same kind/K/radius,
// width/2), i.i.d. Bernoulli(theta^2) when the input is Bernoulli(theta).
SpinConfiguration doubly_open_projection(const Topology& topo, const SpinConfiguration& config);

void export_core_json(const Topology& topo, const StableCore& core,
                      const std::vector<Droplet>& droplets, std::ostream& out);

}  // namespace treestack

#endif
