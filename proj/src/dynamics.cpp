#include "treestack/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <queue>
#include <stdexcept>

#include "treestack/rng.hpp"

namespace treestack {

const char* to_string(BoundaryMode mode) {
    return mode == BoundaryMode::Free ? "free" : "clamped";
}

BoundaryMode boundary_mode_from_string(const std::string& s) {
    if (s == "free") return BoundaryMode::Free;
    if (s == "clamped") return BoundaryMode::Clamped;
    throw std::invalid_argument("unknown boundary mode: " + s);
}

void validate_rule(const UpdateRule& rule, const Topology& topo) {
    if (rule.tieBias < 0.0 || rule.tieBias > 1.0)
        throw std::invalid_argument("tie bias must be in [0,1]");
    if (rule.mode == UpdateMode::Threshold) {
        int n0 = 0;
        for (int v = 0; v < topo.vertexCount; ++v) n0 = std::max(n0, topo.fullDegree(v));
        if (2 * rule.thresholdM0 <= n0)
            throw std::invalid_argument("threshold M0 must exceed N0/2");
    }
    if (rule.mode == UpdateMode::Multicolor) {
        if (rule.colorCount < 2) throw std::invalid_argument("need at least 2 colors");
        if (rule.majorityColor < 1 || rule.majorityColor > rule.colorCount)
            throw std::invalid_argument("majority color out of range");
    }
}

namespace {

struct Decision {
    bool needsCoin = false;
    Spin value = 0;      // deterministic outcome when needsCoin is false
    Spin coinPlus = 0;   // outcome when the tie coin lands "plus"
    Spin coinMinus = 0;  // outcome otherwise
};

// Most frequent color != majorityColor among the neighbors (smallest color
// id breaks ties); falls back to own spin when it is already a minority color.
Spin rest_value(const UpdateRule& rule, Spin own, std::span<const Spin> neighbors) {
    if (own != rule.majorityColor) return own;
    int best = -1, bestCount = 0;
    std::array<int, 32> counts{};
    std::vector<int> big;
    if (rule.colorCount > 32) big.assign(rule.colorCount + 1, 0);
    for (Spin s : neighbors) {
        if (s == rule.majorityColor) continue;
        int& c = rule.colorCount > 32 ? big[s] : counts[s];
        ++c;
        if (c > bestCount || (c == bestCount && s < best)) {
            bestCount = c;
            best = s;
        }
    }
    if (best < 0) return own;  // no dissenting neighbor at all
    return static_cast<Spin>(best);
}

Decision decide(const UpdateRule& rule, Spin own, std::span<const Spin> neighbors,
                int ghostPlus) {
    const int total = static_cast<int>(neighbors.size()) + ghostPlus;
    Decision d;
    if (rule.mode == UpdateMode::Multicolor) {
        int plus = ghostPlus;  // ghosts stand in for a majority-color exterior
        for (Spin s : neighbors)
            if (s == rule.majorityColor) ++plus;
        const int minus = total - plus;
        if (plus > minus) {
            d.value = rule.majorityColor;
        } else if (minus > plus) {
            d.value = rest_value(rule, own, neighbors);
        } else if (rule.tieAction == TieAction::Hold) {
            d.value = own;
        } else {
            d.needsCoin = true;
            d.coinPlus = rule.majorityColor;
            d.coinMinus = rest_value(rule, own, neighbors);
        }
        return d;
    }

    int plus = ghostPlus;
    for (Spin s : neighbors)
        if (s > 0) ++plus;
    const int minus = total - plus;

    if (rule.mode == UpdateMode::Threshold) {
        if (plus >= rule.thresholdM0) {
            d.value = 1;
            return d;
        }
        switch (rule.fallback) {
            case ThresholdFallback::Hold: d.value = own; return d;
            case ThresholdFallback::AlwaysMinus: d.value = -1; return d;
            case ThresholdFallback::Majority: break;  // fall through to majority
        }
    }

    if (plus > minus) {
        d.value = 1;
    } else if (minus > plus) {
        d.value = -1;
    } else if (rule.tieAction == TieAction::Hold) {
        d.value = own;
    } else {
        d.needsCoin = true;
        d.coinPlus = 1;
        d.coinMinus = -1;
    }
    return d;
}

// Whether any admissible coin outcome differs from the current spin.
bool unstable(const UpdateRule& rule, Spin own, const Decision& d) {
    if (!d.needsCoin) return d.value != own;
    const bool plusReachable = rule.tieBias > 0.0;
    const bool minusReachable = rule.tieBias < 1.0;
    return (plusReachable && d.coinPlus != own) || (minusReachable && d.coinMinus != own);
}

struct Engine {
    const Topology& topo;
    const UpdateRule& rule;
    const RunOptions& options;
    std::vector<Spin> spins;
    std::vector<char> active;
    int activeCount = 0;

    Engine(const Topology& t, const UpdateRule& r, const RunOptions& o,
           const SpinConfiguration& initial)
        : topo(t), rule(r), options(o), spins(initial.spins) {
        if (static_cast<int>(spins.size()) != topo.vertexCount)
            throw std::invalid_argument("configuration size does not match topology");
        active.assign(topo.vertexCount, 0);
        for (int v = 0; v < topo.vertexCount; ++v)
            if (recompute(v)) {
                active[v] = 1;
                ++activeCount;
            }
    }

    int ghostPlus(int v) const {
        return options.boundary == BoundaryMode::Clamped ? topo.ghostCount(v) : 0;
    }

    Decision decisionFor(int v, const std::vector<Spin>& state) const {
        const auto& nbrs = topo.adjacency[v];
        thread_local std::vector<Spin> buf;
        buf.clear();
        for (int w : nbrs) buf.push_back(state[w]);
        return decide(rule, state[v], std::span<const Spin>(buf), ghostPlus(v));
    }

    bool recompute(int v) const { return unstable(rule, spins[v], decisionFor(v, spins)); }

    void refresh(int v) {
        const bool now = recompute(v);
        if (now != static_cast<bool>(active[v])) {
            active[v] = now;
            activeCount += now ? 1 : -1;
        }
    }
};

}  // namespace

Spin evaluate_update(const UpdateRule& rule, Spin ownSpin, std::span<const Spin> neighborSpins,
                     double coinDraw, int ghostPlus) {
    if (neighborSpins.empty() && ghostPlus == 0)
        throw std::invalid_argument("vertex has no neighbors");
    const Decision d = decide(rule, ownSpin, neighborSpins, ghostPlus);
    if (!d.needsCoin) return d.value;
    return coinDraw < rule.tieBias ? d.coinPlus : d.coinMinus;
}

SpinConfiguration sample_initial(const Topology& topo, double theta, std::uint64_t seed) {
    if (theta < 0.0 || theta > 1.0) throw std::invalid_argument("theta must be in [0,1]");
    Rng rng(derive_seed(seed, "init"));
    SpinConfiguration config;
    config.spins.resize(topo.vertexCount);
    for (int v = 0; v < topo.vertexCount; ++v)
        config.spins[v] = rng.u01() < theta ? Spin{1} : Spin{-1};
    return config;
}

SpinConfiguration sample_initial_multicolor(const Topology& topo,
                                            const std::vector<double>& colorWeights,
                                            std::uint64_t seed) {
    double sum = 0.0;
    for (double w : colorWeights) {
        if (w < 0.0) throw std::invalid_argument("negative color weight");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("color weights must sum to 1");
    Rng rng(derive_seed(seed, "init"));
    SpinConfiguration config;
    config.spins.resize(topo.vertexCount);
    for (int v = 0; v < topo.vertexCount; ++v) {
        double u = rng.u01();
        int color = static_cast<int>(colorWeights.size());
        for (std::size_t i = 0; i < colorWeights.size(); ++i) {
            u -= colorWeights[i];
            if (u < 0.0) {
                color = static_cast<int>(i) + 1;
                break;
            }
        }
        config.spins[v] = static_cast<Spin>(std::min<int>(color, colorWeights.size()));
    }
    return config;
}

DynamicsRun run_async(const Topology& topo, const SpinConfiguration& initial,
                      const UpdateRule& rule, const RunOptions& options, std::uint64_t seed) {
    if (options.horizon <= 0.0) throw std::invalid_argument("horizon must be positive");
    validate_rule(rule, topo);

    DynamicsRun run;
    run.seed = seed;
    run.horizon = options.horizon;
    run.lastFlipTime.assign(topo.vertexCount, -1.0);

    Engine engine(topo, rule, options, initial);

    std::vector<Rng> clocks, coins;
    clocks.reserve(topo.vertexCount);
    coins.reserve(topo.vertexCount);
    for (int v = 0; v < topo.vertexCount; ++v) {
        clocks.emplace_back(derive_seed(seed, "clock", static_cast<std::uint64_t>(v)));
        coins.emplace_back(derive_seed(seed, "coin", static_cast<std::uint64_t>(v)));
    }

    using Event = std::pair<double, int>;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue;
    for (int v = 0; v < topo.vertexCount; ++v) {
        const double t = clocks[v].exp1();
        if (t <= options.horizon) queue.emplace(t, v);
    }

    if (engine.activeCount == 0) {
        run.absorbed = true;
        run.absorbedTime = 0.0;
    }

    double now = 0.0;
    while (!queue.empty()) {
        if (run.absorbed && options.stopWhenAbsorbed) break;
        auto [t, v] = queue.top();
        queue.pop();
        now = t;
        ++run.clockRings;
        const double tNext = t + clocks[v].exp1();
        if (tNext <= options.horizon) queue.emplace(tNext, v);

        const Decision d = engine.decisionFor(v, engine.spins);
        Spin next;
        if (d.needsCoin) {
            // Tie coins are consumed only when a tie actually occurs, so the
            // coin stream stays aligned across runs with different spins.
            next = coins[v].u01() < rule.tieBias ? d.coinPlus : d.coinMinus;
        } else {
            next = d.value;
        }
        if (next == engine.spins[v]) continue;

        run.flipLog.push_back({t, v, engine.spins[v], next});
        if (static_cast<long long>(run.flipLog.size()) > options.flipCap)
            throw std::runtime_error("flip cap exceeded; dynamics did not settle");
        engine.spins[v] = next;
        run.lastFlipTime[v] = t;
        engine.refresh(v);
        for (int w : topo.adjacency[v]) engine.refresh(w);
        if (engine.activeCount == 0) {
            run.absorbed = true;
            run.absorbedTime = t;
        }
    }

    run.finalConfiguration.spins = std::move(engine.spins);
    run.finalConfiguration.time = run.absorbed ? options.horizon : now;
    if (!run.absorbed && engine.activeCount == 0) {
        run.absorbed = true;
        run.absorbedTime = now;
    }
    return run;
}

DynamicsRun run_sync(const Topology& topo, const SpinConfiguration& initial,
                     const UpdateRule& rule, int steps, const RunOptions& options,
                     std::uint64_t seed) {
    if (steps < 0) throw std::invalid_argument("steps must be >= 0");
    validate_rule(rule, topo);

    DynamicsRun run;
    run.seed = seed;
    run.horizon = steps;
    run.lastFlipTime.assign(topo.vertexCount, -1.0);

    Engine engine(topo, rule, options, initial);
    std::vector<Rng> coins;
    coins.reserve(topo.vertexCount);
    for (int v = 0; v < topo.vertexCount; ++v)
        coins.emplace_back(derive_seed(seed, "coin", static_cast<std::uint64_t>(v)));

    std::vector<Spin> prev = engine.spins;
    for (int step = 1; step <= steps; ++step) {
        if (engine.activeCount == 0) {
            run.absorbed = true;
            run.absorbedTime = step - 1;
            break;
        }
        prev = engine.spins;
        for (int v = 0; v < topo.vertexCount; ++v) {
            const Decision d = engine.decisionFor(v, prev);
            Spin next = d.needsCoin
                            ? (coins[v].u01() < rule.tieBias ? d.coinPlus : d.coinMinus)
                            : d.value;
            if (next != prev[v]) {
                run.flipLog.push_back({static_cast<double>(step), v, prev[v], next});
                engine.spins[v] = next;
                run.lastFlipTime[v] = step;
            }
        }
        if (static_cast<long long>(run.flipLog.size()) > options.flipCap)
            throw std::runtime_error("flip cap exceeded");
        engine.activeCount = 0;
        for (int v = 0; v < topo.vertexCount; ++v) {
            engine.active[v] = engine.recompute(v);
            engine.activeCount += engine.active[v];
        }
    }
    if (engine.activeCount == 0 && !run.absorbed) {
        run.absorbed = true;
        run.absorbedTime = steps;
    }
    run.finalConfiguration.spins = std::move(engine.spins);
    run.finalConfiguration.time = steps;
    return run;
}

bool is_absorbing(const Topology& topo, const SpinConfiguration& config, const UpdateRule& rule,
                  BoundaryMode boundary) {
    RunOptions options;
    options.boundary = boundary;
    Engine engine(topo, rule, options, config);
    return engine.activeCount == 0;
}

void export_flip_log_csv(const DynamicsRun& run, std::ostream& out) {
    out << "time,vertex,old,new\n";
    char buf[64];
    for (const auto& e : run.flipLog) {
        std::snprintf(buf, sizeof buf, "%.17g", e.time);
        out << buf << ',' << e.vertex << ',' << int(e.oldSpin) << ',' << int(e.newSpin) << '\n';
    }
}

void export_configuration(const Topology& topo, const SpinConfiguration& config,
                          std::ostream& out) {
    for (int layer = 0; layer < topo.width; ++layer) {
        for (int u = 0; u < topo.treeVertexCount; ++u) {
            const Spin s = config.spins[topo.vertexId(u, layer)];
            if (s == 1)
                out << '+';
            else if (s == -1)
                out << '-';
            else
                out << int(s);
        }
        out << '\n';
    }
}

}  // namespace treestack
