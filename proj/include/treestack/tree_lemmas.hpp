#ifndef TREESTACK_TREE_LEMMAS_HPP
#define TREESTACK_TREE_LEMMAS_HPP

#include <cstdint>
#include <vector>

#include "treestack/topology.hpp"

namespace treestack {

// Combinatorics of Steiner subtrees over special vertex sets: degree
// censuses, good/bad 2-point classification, and the disjoint witness-region
// families that make the per-special-vertex decay bound work.

struct SteinerTree {
    std::vector<int> vertices;        // sorted vertex ids of T
    std::vector<char> inTree;         // indexed by ambient vertex id
    std::vector<char> special;       // indexed by ambient vertex id
    std::vector<int> specialVertices; // sorted (Lambda)

    int degreeIn(const Topology& topo, int v) const;
};

// Minimal subtree of the ambient tree containing all of Lambda, computed by
// iteratively deleting non-special leaves. Every leaf of the result is
// special.
SteinerTree steiner_subtree(const Topology& ambient, const std::vector<int>& lambda);

struct DegreeCensus {
    std::vector<int> counts;  // counts[i] = number of (i+1)-points, i = 0..K-1
    int leaves() const { return counts[0]; }
    int total() const;
};

// Exact census of T's internal degrees; verifies M_i <= M_1 for i >= 3.
DegreeCensus degree_census(const Topology& topo, const SteinerTree& tree);

struct TwoPointClassification {
    std::vector<int> goodSpecial;           // sorted
    std::vector<int> badSpecial;            // sorted
    std::vector<std::vector<int>> chains;   // maximal chains of good special
                                            // 2-points, consecutively ordered
};

TwoPointClassification classify_special_2points(const Topology& topo, const SteinerTree& tree);

struct LemmaBranchReport {
    bool branchA = false;  // M_1 >= eps1 * N1
    bool branchB = false;  // #good special 2-points >= eps2 * N1
    int leaves = 0;
    int goodSpecialCount = 0;
    int specialCount = 0;
};

LemmaBranchReport check_lemma_b3(const Topology& topo, const SteinerTree& tree);

enum class FamilyKind { LeafFamily, PairFamily };

struct EventFamilyItem {
    std::vector<int> anchors;   // one leaf, or a (v, w) pair
    std::vector<int> witness;   // sorted vertex ids of the witness region
};

struct EventFamily {
    FamilyKind kind = FamilyKind::LeafFamily;
    std::vector<EventFamilyItem> items;
    long long guaranteedCount = 0;  // ceil(eps1*N1) or floor(N3/2)
    bool witnessesDisjoint = false;
};

// Leaf family over >= ceil(eps1*N1) leaves when branch a holds, otherwise
// the chain pairing of good special 2-points; witness regions are checked
// for exact pairwise disjointness inside the truncation.
EventFamily build_event_family(const Topology& ambient, const SteinerTree& tree);

struct PropositionCheckReport {
    double frequency = 0.0;      // MC frequency of {Lambda ∩ core = empty}
    double bound = 0.0;          // lambda^|Lambda| at lambda = 1.05 * lambda*
    double stderr_ = 0.0;
    long long samples = 0;
    bool violated = false;       // beyond 4 sigma above the bound
};

PropositionCheckReport empirical_proposition_check(const Topology& ambient,
                                                   const std::vector<int>& lambda, double theta,
                                                   long long samples, std::uint64_t seed);

}  // namespace treestack

#endif
