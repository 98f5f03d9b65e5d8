#include "treestack/stable_core.hpp"

#include <algorithm>
#include <deque>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace treestack {

const char* to_string(CoreVariant v) {
    switch (v) {
        case CoreVariant::SingleLayer: return "single_layer";
        case CoreVariant::DoublyOpen: return "doubly_open";
        case CoreVariant::TriplyOpen: return "triply_open";
    }
    return "?";
}

const char* to_string(CoreBoundaryMode m) {
    return m == CoreBoundaryMode::Free ? "free" : "wildcard";
}

CoreVariant core_variant_from_string(const std::string& s) {
    if (s == "single_layer") return CoreVariant::SingleLayer;
    if (s == "doubly_open") return CoreVariant::DoublyOpen;
    if (s == "triply_open") return CoreVariant::TriplyOpen;
    throw std::invalid_argument("unknown core variant: " + s);
}

std::vector<int> StableCore::members() const {
    std::vector<int> out;
    for (int v = 0; v < static_cast<int>(member.size()); ++v)
        if (member[v]) out.push_back(v);
    return out;
}

long long StableCore::size() const {
    return std::count(member.begin(), member.end(), char{1});
}

std::vector<int> plus_cluster(const Topology& topo, const SpinConfiguration& config, int v) {
    std::vector<int> cluster;
    if (config.spins[v] != 1) return cluster;
    std::vector<char> seen(topo.vertexCount, 0);
    std::vector<int> stack{v};
    seen[v] = 1;
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        cluster.push_back(u);
        for (int w : topo.adjacency[u])
            if (!seen[w] && config.spins[w] == 1) {
                seen[w] = 1;
                stack.push_back(w);
            }
    }
    std::sort(cluster.begin(), cluster.end());
    return cluster;
}

namespace {

// Iterative pruning on tree coordinates: keep alive coords whose surviving
// in-tree degree plus wildcard credit is >= K-1. The fixed point is order
// independent, so a simple worklist suffices.
std::vector<char> prune_block(const Topology& topo, const std::vector<char>& alive,
                              CoreBoundaryMode boundaryMode) {
    const int n = topo.treeVertexCount;
    const int need = topo.K - 1;
    std::vector<char> live = alive;
    std::vector<int> score(n, 0);
    std::deque<int> work;
    for (int u = 0; u < n; ++u) {
        if (!live[u]) continue;
        int s = 0;
        for (int w : topo.coordAdj[u])
            if (live[w]) ++s;
        if (boundaryMode == CoreBoundaryMode::Wildcard && topo.coordDepth[u] == topo.radius)
            s += topo.K - static_cast<int>(topo.coordAdj[u].size());
        score[u] = s;
        if (s < need) work.push_back(u);
    }
    while (!work.empty()) {
        const int u = work.front();
        work.pop_front();
        if (!live[u]) continue;
        live[u] = 0;
        for (int w : topo.coordAdj[u])
            if (live[w] && --score[w] < need) work.push_back(w);
    }
    return live;
}

}  // namespace

StableCore compute_stable_core(const Topology& topo, const SpinConfiguration& config,
                               CoreVariant variant, CoreBoundaryMode boundaryMode) {
    if (static_cast<int>(config.spins.size()) != topo.vertexCount)
        throw std::invalid_argument("configuration size does not match topology");

    StableCore core;
    core.variant = variant;
    core.boundaryMode = boundaryMode;
    core.member.assign(topo.vertexCount, 0);

    // Layer blocks: singletons, consecutive pairs, or pairs plus a final
    // triple for odd-width stacks.
    std::vector<std::vector<int>> blocks;
    switch (variant) {
        case CoreVariant::SingleLayer:
            for (int i = 0; i < topo.width; ++i) blocks.push_back({i});
            break;
        case CoreVariant::DoublyOpen:
            if (topo.kind == TopologyKind::Tree)
                throw std::invalid_argument("doubly-open core needs a stack topology");
            if (topo.width % 2 != 0)
                throw std::invalid_argument("doubly-open core needs an even layer count");
            for (int i = 0; i + 1 < topo.width; i += 2) blocks.push_back({i, i + 1});
            break;
        case CoreVariant::TriplyOpen:
            if (topo.kind != TopologyKind::StackFreeFinite &&
                topo.kind != TopologyKind::StackPeriodicFinite)
                throw std::invalid_argument("triply-open core is for finite free/periodic stacks");
            if (topo.width < 3 || topo.width % 2 == 0)
                throw std::invalid_argument("triply-open core needs odd width >= 3");
            for (int i = 0; i + 3 < topo.width; i += 2) blocks.push_back({i, i + 1});
            blocks.push_back({topo.width - 3, topo.width - 2, topo.width - 1});
            break;
    }

    std::vector<char> alive(topo.treeVertexCount);
    for (const auto& block : blocks) {
        for (int u = 0; u < topo.treeVertexCount; ++u) {
            bool open = true;
            for (int layer : block)
                open = open && config.spins[topo.vertexId(u, layer)] == 1;
            alive[u] = open;
        }
        const std::vector<char> live = prune_block(topo, alive, boundaryMode);
        for (int u = 0; u < topo.treeVertexCount; ++u)
            if (live[u])
                for (int layer : block) core.member[topo.vertexId(u, layer)] = 1;
    }

    for (int v = 0; v < topo.vertexCount; ++v)
        if (core.member[v]) core.perLayerPieces[topo.layerOf[v]].push_back(v);
    return core;
}

CoreStabilityReport verify_core_stability(const Topology& topo, const StableCore& core,
                                          const UpdateRule& rule) {
    // Only block-mates count as guaranteed: the construction pins down
    // in-layer core neighbors and the open partners within the same layer
    // block, while neighbors in other blocks may be flipped adversarially.
    auto blockOf = [&](int layer) {
        switch (core.variant) {
            case CoreVariant::SingleLayer: return layer;
            case CoreVariant::DoublyOpen: return layer / 2;
            case CoreVariant::TriplyOpen:
                return layer >= topo.width - 3 ? (topo.width - 3) / 2 : layer / 2;
        }
        return layer;
    };

    CoreStabilityReport report;
    bool first = true;
    for (int v = 0; v < topo.vertexCount; ++v) {
        if (!core.member[v]) continue;
        int guaranteed = 0;
        for (int w : topo.adjacency[v])
            if (core.member[w] && blockOf(topo.layerOf[w]) == blockOf(topo.layerOf[v]))
                ++guaranteed;
        int degree = topo.degree(v);
        if (core.boundaryMode == CoreBoundaryMode::Wildcard) {
            // Ghost neighbors exist in the emulated infinite graph and are
            // +1-clamped there.
            guaranteed += topo.ghostCount(v);
            degree = topo.fullDegree(v);
        }
        int margin;
        if (rule.mode == UpdateMode::Threshold)
            margin = guaranteed - rule.thresholdM0;
        else
            margin = 2 * guaranteed - degree - 1;  // >= 0 iff strict majority
        if (first || margin < report.minMargin) report.minMargin = margin;
        first = false;
        if (margin < 0) {
            report.stable = false;
            report.violations.push_back({v, guaranteed, degree, margin});
        }
    }
    return report;
}

std::vector<Droplet> droplet_decomposition(const Topology& topo, const StableCore& core) {
    std::vector<Droplet> droplets;
    std::vector<char> seen(topo.vertexCount, 0);
    for (int start = 0; start < topo.vertexCount; ++start) {
        if (seen[start] || core.member[start]) continue;
        Droplet d;
        d.id = static_cast<int>(droplets.size());
        std::vector<int> stack{start};
        seen[start] = 1;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            d.members.push_back(v);
            if (topo.isBoundary[v]) d.touchesBoundary = true;
            for (int w : topo.adjacency[v])
                if (!seen[w] && !core.member[w]) {
                    seen[w] = 1;
                    stack.push_back(w);
                }
        }
        std::sort(d.members.begin(), d.members.end());
        droplets.push_back(std::move(d));
    }
    return droplets;
}

void track_droplet_elimination(const DynamicsRun& run, std::vector<Droplet>& droplets) {
    for (auto& d : droplets) {
        bool eliminated = true;
        double t = 0.0;
        for (int v : d.members) {
            if (run.finalConfiguration.spins[v] != 1) {
                eliminated = false;
                break;
            }
            t = std::max(t, std::max(run.lastFlipTime[v], 0.0));
        }
        if (eliminated)
            d.eliminationTime = t;
        else
            d.eliminationTime.reset();
    }
}

SpinConfiguration doubly_open_projection(const Topology& topo,
                                         const SpinConfiguration& config) {
    if (topo.kind == TopologyKind::Tree)
        throw std::invalid_argument("projection needs a stack topology");
    if (topo.width % 2 != 0)
        throw std::invalid_argument("odd layer count leaves a layer unpaired");
    SpinConfiguration out;
    out.time = config.time;
    out.spins.resize(topo.treeVertexCount * (topo.width / 2));
    for (int i = 0; i * 2 < topo.width; ++i)
        for (int u = 0; u < topo.treeVertexCount; ++u) {
            const bool open = config.spins[topo.vertexId(u, 2 * i)] == 1 &&
                              config.spins[topo.vertexId(u, 2 * i + 1)] == 1;
            out.spins[i * topo.treeVertexCount + u] = open ? Spin{1} : Spin{-1};
        }
    return out;
}

void export_core_json(const Topology& topo, const StableCore& core,
                      const std::vector<Droplet>& droplets, std::ostream& out) {
    nlohmann::json j;
    j["variant"] = to_string(core.variant);
    j["boundaryMode"] = to_string(core.boundaryMode);
    j["members"] = core.members();
    auto& ds = j["droplets"] = nlohmann::json::array();
    for (const auto& d : droplets) {
        nlohmann::json jd;
        jd["id"] = d.id;
        jd["size"] = d.members.size();
        jd["touchesBoundary"] = d.touchesBoundary;
        if (d.eliminationTime)
            jd["eliminationTime"] = *d.eliminationTime;
        else
            jd["eliminationTime"] = nullptr;
        ds.push_back(std::move(jd));
    }
    (void)topo;
    out << j.dump(2) << "\n";
}

}  // namespace treestack
