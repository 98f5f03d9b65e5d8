#ifndef TREESTACK_DYNAMICS_HPP
#define TREESTACK_DYNAMICS_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "treestack/topology.hpp"

namespace treestack {

// Spin values are +1/-1 in the binary modes and 1..q in multicolor mode.
using Spin = std::int8_t;

struct SpinConfiguration {
    std::vector<Spin> spins;
    double time = 0.0;
};

enum class UpdateMode { Majority, Threshold, Multicolor };
enum class TieAction { Coin, Hold };

// What a Threshold-rule vertex does when its +1 neighbor count is below M0.
// Anything is allowed there; the stable-core guarantees must survive even the
// adversarial choice.
enum class ThresholdFallback { Majority, Hold, AlwaysMinus };

struct UpdateRule {
    UpdateMode mode = UpdateMode::Majority;
    double tieBias = 0.5;  // probability the tie coin lands +1
    TieAction tieAction = TieAction::Coin;
    int thresholdM0 = 0;
    ThresholdFallback fallback = ThresholdFallback::Majority;
    int colorCount = 2;
    Spin majorityColor = 1;
};

void validate_rule(const UpdateRule& rule, const Topology& topo);

// Boundary emulation for truncated graphs: Free uses the reduced degrees as
// is; Clamped adds ghost +1 neighbors standing in for the clipped exterior.
enum class BoundaryMode { Free, Clamped };

const char* to_string(BoundaryMode mode);
BoundaryMode boundary_mode_from_string(const std::string& s);

// Pure update decision. ghostPlus many additional permanent +1 neighbors are
// counted on top of neighborSpins (0 in free boundary mode).
Spin evaluate_update(const UpdateRule& rule, Spin ownSpin, std::span<const Spin> neighborSpins,
                     double coinDraw, int ghostPlus = 0);

struct FlipEvent {
    double time;
    int vertex;
    Spin oldSpin;
    Spin newSpin;
};

struct DynamicsRun {
    std::uint64_t seed = 0;
    double horizon = 0.0;
    bool absorbed = false;
    double absorbedTime = -1.0;
    std::vector<FlipEvent> flipLog;
    SpinConfiguration finalConfiguration;
    std::vector<double> lastFlipTime;  // -1 when the vertex never flipped
    long long clockRings = 0;
};

struct RunOptions {
    double horizon = 50.0;
    BoundaryMode boundary = BoundaryMode::Free;
    long long flipCap = 200'000'000;  // resource guard
    bool stopWhenAbsorbed = true;
};

SpinConfiguration sample_initial(const Topology& topo, double theta, std::uint64_t seed);
SpinConfiguration sample_initial_multicolor(const Topology& topo,
                                            const std::vector<double>& colorWeights,
                                            std::uint64_t seed);

// Exact event-driven simulation of the asynchronous rate-1 dynamics.
DynamicsRun run_async(const Topology& topo, const SpinConfiguration& initial,
                      const UpdateRule& rule, const RunOptions& options, std::uint64_t seed);

// Synchronous variant: all vertices update simultaneously at integer times.
DynamicsRun run_sync(const Topology& topo, const SpinConfiguration& initial,
                     const UpdateRule& rule, int steps, const RunOptions& options,
                     std::uint64_t seed);

// True iff no vertex disagrees with its forced value and no vertex sits at a
// tie that a coin would eventually flip.
bool is_absorbing(const Topology& topo, const SpinConfiguration& config, const UpdateRule& rule,
                  BoundaryMode boundary = BoundaryMode::Free);

void export_flip_log_csv(const DynamicsRun& run, std::ostream& out);
void export_configuration(const Topology& topo, const SpinConfiguration& config,
                          std::ostream& out);

}  // namespace treestack

#endif
