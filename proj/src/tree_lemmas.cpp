#include "treestack/tree_lemmas.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "treestack/dynamics.hpp"
#include "treestack/gw_analytics.hpp"
#include "treestack/rng.hpp"
#include "treestack/stable_core.hpp"

namespace treestack {

int SteinerTree::degreeIn(const Topology& topo, int v) const {
    int d = 0;
    for (int w : topo.adjacency[v])
        if (inTree[w]) ++d;
    return d;
}

SteinerTree steiner_subtree(const Topology& ambient, const std::vector<int>& lambda) {
    if (ambient.kind != TopologyKind::Tree)
        throw std::invalid_argument("Steiner subtrees live in a tree topology");
    if (lambda.empty()) throw std::invalid_argument("special set must be nonempty");

    SteinerTree tree;
    tree.inTree.assign(ambient.vertexCount, 1);
    tree.special.assign(ambient.vertexCount, 0);
    for (int v : lambda) {
        if (v < 0 || v >= ambient.vertexCount)
            throw std::invalid_argument("special vertex out of range");
        tree.special[v] = 1;
    }

    // Peel non-special leaves until only the minimal spanning subtree is left.
    std::vector<int> degree(ambient.vertexCount);
    std::deque<int> work;
    for (int v = 0; v < ambient.vertexCount; ++v) {
        degree[v] = ambient.degree(v);
        if (degree[v] <= 1 && !tree.special[v]) work.push_back(v);
    }
    while (!work.empty()) {
        const int v = work.front();
        work.pop_front();
        if (!tree.inTree[v] || tree.special[v] || degree[v] > 1) continue;
        tree.inTree[v] = 0;
        for (int w : ambient.adjacency[v])
            if (tree.inTree[w] && --degree[w] <= 1 && !tree.special[w]) work.push_back(w);
    }

    for (int v = 0; v < ambient.vertexCount; ++v)
        if (tree.inTree[v]) tree.vertices.push_back(v);
    tree.specialVertices = lambda;
    std::sort(tree.specialVertices.begin(), tree.specialVertices.end());
    tree.specialVertices.erase(
        std::unique(tree.specialVertices.begin(), tree.specialVertices.end()),
        tree.specialVertices.end());
    return tree;
}

int DegreeCensus::total() const {
    int n = 0;
    for (int c : counts) n += c;
    return n;
}

DegreeCensus degree_census(const Topology& topo, const SteinerTree& tree) {
    DegreeCensus census;
    census.counts.assign(topo.K, 0);
    for (int v : tree.vertices) {
        const int d = tree.degreeIn(topo, v);
        // A singleton tree has one degree-0 vertex; count it with the leaves.
        const int slot = std::max(d, 1) - 1;
        if (slot >= topo.K) throw std::logic_error("Steiner tree degree exceeds K");
        ++census.counts[slot];
    }
    for (int i = 2; i < topo.K; ++i)
        if (census.counts[i] > census.counts[0])
            throw std::logic_error("degree census violates M_i <= M_1");
    return census;
}

TwoPointClassification classify_special_2points(const Topology& topo, const SteinerTree& tree) {
    TwoPointClassification out;
    std::vector<char> isTwo(topo.vertexCount, 0), isGoodSpecial(topo.vertexCount, 0);
    for (int v : tree.vertices) isTwo[v] = tree.degreeIn(topo, v) == 2;
    for (int v : tree.vertices) {
        if (!isTwo[v]) continue;
        bool good = true;
        for (int w : topo.adjacency[v])
            if (tree.inTree[w]) good = good && isTwo[w];
        if (!tree.special[v]) continue;
        if (good) {
            out.goodSpecial.push_back(v);
            isGoodSpecial[v] = 1;
        } else {
            out.badSpecial.push_back(v);
        }
    }

    // Good special 2-points form disjoint paths along T; walk each from an
    // endpoint so chain members come out consecutively ordered.
    std::vector<char> used(topo.vertexCount, 0);
    auto goodNeighbors = [&](int v) {
        std::vector<int> ns;
        for (int w : topo.adjacency[v])
            if (tree.inTree[w] && isGoodSpecial[w]) ns.push_back(w);
        return ns;
    };
    for (int v : out.goodSpecial) {
        if (used[v]) continue;
        const auto ns = goodNeighbors(v);
        if (ns.size() >= 2 && !used[ns[0]] && !used[ns[1]]) continue;  // interior; start later
        std::vector<int> chain;
        int prev = -1, cur = v;
        while (cur != -1) {
            chain.push_back(cur);
            used[cur] = 1;
            int next = -1;
            for (int w : goodNeighbors(cur))
                if (w != prev && !used[w]) next = w;
            prev = cur;
            cur = next;
        }
        out.chains.push_back(std::move(chain));
    }
    return out;
}

LemmaBranchReport check_lemma_b3(const Topology& topo, const SteinerTree& tree) {
    const DegreeCensus census = degree_census(topo, tree);
    const TwoPointClassification cls = classify_special_2points(topo, tree);
    LemmaBranchReport report;
    report.leaves = census.leaves();
    report.goodSpecialCount = static_cast<int>(cls.goodSpecial.size());
    report.specialCount = static_cast<int>(tree.specialVertices.size());
    report.branchA = report.leaves >= epsilon1(topo.K) * report.specialCount;
    report.branchB = report.goodSpecialCount >= epsilon2(topo.K) * report.specialCount;
    if (!report.branchA && !report.branchB)
        throw std::logic_error("neither lemma branch holds; implementation bug");
    return report;
}

namespace {

int other_tree_neighbor(const Topology& topo, const SteinerTree& tree, int v, int avoid) {
    int found = -1;
    for (int w : topo.adjacency[v])
        if (tree.inTree[w] && w != avoid) {
            if (found < 0 || w < found) found = w;
        }
    if (found < 0) throw std::logic_error("expected another tree neighbor");
    return found;
}

bool pairwise_disjoint(const std::vector<EventFamilyItem>& items) {
    for (std::size_t i = 0; i < items.size(); ++i)
        for (std::size_t j = i + 1; j < items.size(); ++j) {
            std::vector<int> inter;
            std::set_intersection(items[i].witness.begin(), items[i].witness.end(),
                                  items[j].witness.begin(), items[j].witness.end(),
                                  std::back_inserter(inter));
            if (!inter.empty()) return false;
        }
    return true;
}

}  // namespace

EventFamily build_event_family(const Topology& ambient, const SteinerTree& tree) {
    const int n1 = static_cast<int>(tree.specialVertices.size());
    if (n1 < 2) throw std::invalid_argument("need at least 2 special vertices");

    const LemmaBranchReport branches = check_lemma_b3(ambient, tree);
    EventFamily family;

    if (branches.branchA) {
        family.kind = FamilyKind::LeafFamily;
        family.guaranteedCount =
            static_cast<long long>(std::ceil(epsilon1(ambient.K) * n1 - 1e-12));
        for (int v : tree.vertices) {
            if (tree.degreeIn(ambient, v) != 1) continue;
            const int vPrime = other_tree_neighbor(ambient, tree, v, -1);
            EventFamilyItem item;
            item.anchors = {v};
            item.witness = branch_region(ambient, v, {vPrime}).members;
            family.items.push_back(std::move(item));
        }
    } else {
        family.kind = FamilyKind::PairFamily;
        const TwoPointClassification cls = classify_special_2points(ambient, tree);
        long long n3 = 0;
        for (const auto& chain : cls.chains) n3 += static_cast<long long>(chain.size());
        family.guaranteedCount = n3 / 2;
        for (const auto& chain : cls.chains) {
            const int n = static_cast<int>(chain.size());
            for (int j = 0; j + 1 < n; j += 2) {
                const int v = chain[j], w = chain[j + 1];
                const int vPrime = other_tree_neighbor(ambient, tree, v, w);
                const int wPrime = other_tree_neighbor(ambient, tree, w, v);
                EventFamilyItem item;
                item.anchors = {v, w};
                auto a = branch_region(ambient, v, {vPrime, w}).members;
                auto b = branch_region(ambient, w, {v, wPrime}).members;
                std::merge(a.begin(), a.end(), b.begin(), b.end(),
                           std::back_inserter(item.witness));
                family.items.push_back(std::move(item));
            }
            if (n % 2 == 1) {
                // Odd leftover: pair the last chain vertex with the tree
                // neighbor away from its predecessor (smaller id when both
                // qualify, i.e. a length-1 chain).
                const int v = chain[n - 1];
                const int avoid = n >= 2 ? chain[n - 2] : -1;
                const int w = other_tree_neighbor(ambient, tree, v, avoid);
                const int vPrime = avoid >= 0 ? avoid : other_tree_neighbor(ambient, tree, v, w);
                const int wPrime = other_tree_neighbor(ambient, tree, w, v);
                EventFamilyItem item;
                item.anchors = {v, w};
                auto a = branch_region(ambient, v, {vPrime, w}).members;
                auto b = branch_region(ambient, w, {v, wPrime}).members;
                std::merge(a.begin(), a.end(), b.begin(), b.end(),
                           std::back_inserter(item.witness));
                family.items.push_back(std::move(item));
            }
        }
    }

    family.witnessesDisjoint = pairwise_disjoint(family.items);
    return family;
}

PropositionCheckReport empirical_proposition_check(const Topology& ambient,
                                                   const std::vector<int>& lambda, double theta,
                                                   long long samples, std::uint64_t seed) {
    if (ambient.kind != TopologyKind::Tree)
        throw std::invalid_argument("proposition check runs on tree topologies");
    if (lambda.empty()) throw std::invalid_argument("special set must be nonempty");
    if (samples < 1000) throw std::invalid_argument("need at least 1000 samples");

    long long misses = 0;
    for (long long i = 0; i < samples; ++i) {
        const SpinConfiguration config =
            sample_initial(ambient, theta, derive_seed(seed, "prop", static_cast<std::uint64_t>(i)));
        const StableCore core = compute_stable_core(ambient, config, CoreVariant::SingleLayer,
                                                    CoreBoundaryMode::Wildcard);
        bool empty = true;
        for (int v : lambda) empty = empty && !core.contains(v);
        if (empty) ++misses;
    }

    PropositionCheckReport report;
    report.samples = samples;
    report.frequency = static_cast<double>(misses) / samples;
    report.stderr_ = std::sqrt(report.frequency * (1.0 - report.frequency) / samples);
    const double base = std::min(1.0, 1.05 * lambda_star(ambient.K, theta));
    report.bound = std::pow(base, static_cast<double>(lambda.size()));
    report.violated = report.frequency > report.bound + 4.0 * report.stderr_;
    return report;
}

}  // namespace treestack
