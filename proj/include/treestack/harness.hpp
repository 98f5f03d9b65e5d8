#ifndef TREESTACK_HARNESS_HPP
#define TREESTACK_HARNESS_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "treestack/dynamics.hpp"
#include "treestack/stable_core.hpp"
#include "treestack/topology.hpp"

namespace treestack {

// Experiment orchestration: one spec file describes a theta sweep over one
// topology; replicas are seeded independently from the master seed and the
// results land as flat files under a directory named by the spec hash.

enum class RunMode { Async, Sync };

struct ExperimentSpec {
    TopologyKind kind = TopologyKind::StackFreeFinite;
    int K = 5;
    int width = 4;
    int radius = 4;

    std::vector<double> thetaGrid;
    RunMode mode = RunMode::Async;
    UpdateRule rule;
    BoundaryMode boundary = BoundaryMode::Clamped;
    CoreVariant coreVariant = CoreVariant::SingleLayer;
    bool coreVariantAuto = true;  // pick per K/width unless the spec pins it

    int replicas = 1;
    double horizon = 50.0;
    int steps = 50;  // sync mode
    int interiorMargin = 2;
    std::uint64_t masterSeed = 1;
    std::string outDir = "runs";
    std::string metrics = "all";
};

// Key=value document, '#' comments, unknown keys are errors.
ExperimentSpec parse_spec(std::istream& in);
ExperimentSpec parse_spec_file(const std::string& path);
std::string serialize_spec(const ExperimentSpec& spec);  // canonical round-trip form
std::string spec_hash(const ExperimentSpec& spec);       // 16 hex digits

// Effective core variant after resolving `auto`.
CoreVariant resolve_core_variant(const ExperimentSpec& spec);

struct RunRecord {
    std::string specHash;
    int thetaIndex = 0;
    int replica = 0;
    double theta = 0.0;
    std::uint64_t seed = 0;

    bool interiorConsensus = false;
    double interiorPlusFraction = 0.0;
    long long coreSize = 0;
    bool coreFrozen = true;  // no core member ever appears in the flip log
    int dropletCount = 0;
    long long maxDropletSize = 0;
    int interiorDroplets = 0;            // droplets fully inside the interior
    int interiorDropletsEliminated = 0;
    double lastInteriorFlipTime = -1.0;
    bool absorbed = false;
    int vertexCount = 0;
    double wallSeconds = 0.0;
};

std::vector<RunRecord> run_experiment(const ExperimentSpec& spec);

// 1 - theta * tau^(K-1): the |Lambda| = 1 decay bound (leaf event rooted at a
// neighbor of the single special vertex).
double single_vertex_bound(int K, double theta);

struct SweepRow {
    double theta = 0.0;
    int replicas = 0;
    double consensusFraction = 0.0;
    double meanCoreDensity = 0.0;
    long long maxDropletSize = 0;
    double meanLastInteriorFlip = 0.0;  // over replicas that flipped at all
    double absorbedFraction = 0.0;
};

struct SweepReport {
    std::vector<SweepRow> rows;  // theta-grid order
};

SweepReport sweep_report(const std::vector<RunRecord>& records);

void write_records_csv(const std::vector<RunRecord>& records, std::ostream& out);
void write_summary_csv(const SweepReport& report, std::ostream& out);
void write_summary_json(const SweepReport& report, std::ostream& out);
void write_sweep_svg(const SweepReport& report, std::ostream& out);

// Runs the experiment and persists spec + records + summary under
// <outDir>/run-<hash>/. Returns the run directory path.
std::string execute_and_persist(const ExperimentSpec& spec);

}  // namespace treestack

#endif
