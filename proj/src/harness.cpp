#include "treestack/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "treestack/gw_analytics.hpp"
#include "treestack/rng.hpp"

namespace treestack {

namespace {

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string fmt_short(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", x);
    return buf;
}

std::vector<double> parse_grid(const std::string& s) {
    std::vector<double> grid;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        grid.push_back(std::stod(tok));
    }
    return grid;
}

RunMode mode_from_string(const std::string& s) {
    if (s == "async") return RunMode::Async;
    if (s == "sync") return RunMode::Sync;
    throw std::invalid_argument("unknown mode: " + s);
}

UpdateMode update_from_string(const std::string& s) {
    if (s == "majority") return UpdateMode::Majority;
    if (s == "threshold") return UpdateMode::Threshold;
    if (s == "multicolor") return UpdateMode::Multicolor;
    throw std::invalid_argument("unknown update rule: " + s);
}

ThresholdFallback fallback_from_string(const std::string& s) {
    if (s == "majority") return ThresholdFallback::Majority;
    if (s == "hold") return ThresholdFallback::Hold;
    if (s == "always_minus") return ThresholdFallback::AlwaysMinus;
    throw std::invalid_argument("unknown fallback: " + s);
}

const char* to_string(RunMode m) { return m == RunMode::Async ? "async" : "sync"; }

const char* to_string(UpdateMode m) {
    switch (m) {
        case UpdateMode::Majority: return "majority";
        case UpdateMode::Threshold: return "threshold";
        case UpdateMode::Multicolor: return "multicolor";
    }
    return "?";
}

const char* to_string(ThresholdFallback f) {
    switch (f) {
        case ThresholdFallback::Majority: return "majority";
        case ThresholdFallback::Hold: return "hold";
        case ThresholdFallback::AlwaysMinus: return "always_minus";
    }
    return "?";
}

}  // namespace

ExperimentSpec parse_spec(std::istream& in) {
    ExperimentSpec spec;
    spec.thetaGrid.clear();
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("spec line " + std::to_string(lineNo) +
                                        ": expected key=value");
        auto strip = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t");
            return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
        };
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));

        if (key == "kind") spec.kind = topology_kind_from_string(value);
        else if (key == "K") spec.K = std::stoi(value);
        else if (key == "width") spec.width = std::stoi(value);
        else if (key == "radius") spec.radius = std::stoi(value);
        else if (key == "theta_grid") spec.thetaGrid = parse_grid(value);
        else if (key == "mode") spec.mode = mode_from_string(value);
        else if (key == "update") spec.rule.mode = update_from_string(value);
        else if (key == "tie") spec.rule.tieAction = value == "hold" ? TieAction::Hold
                                                                     : TieAction::Coin;
        else if (key == "tie_bias") spec.rule.tieBias = std::stod(value);
        else if (key == "m0") spec.rule.thresholdM0 = std::stoi(value);
        else if (key == "fallback") spec.rule.fallback = fallback_from_string(value);
        else if (key == "colors") spec.rule.colorCount = std::stoi(value);
        else if (key == "majority_color") spec.rule.majorityColor =
            static_cast<Spin>(std::stoi(value));
        else if (key == "boundary") spec.boundary = boundary_mode_from_string(value);
        else if (key == "core") {
            spec.coreVariantAuto = value == "auto";
            if (!spec.coreVariantAuto) spec.coreVariant = core_variant_from_string(value);
        }
        else if (key == "replicas") spec.replicas = std::stoi(value);
        else if (key == "horizon") spec.horizon = std::stod(value);
        else if (key == "steps") spec.steps = std::stoi(value);
        else if (key == "interior_margin") spec.interiorMargin = std::stoi(value);
        else if (key == "seed") spec.masterSeed = std::stoull(value);
        else if (key == "out") spec.outDir = value;
        else if (key == "metrics") spec.metrics = value;
        else throw std::invalid_argument("unknown spec key: " + key);
    }

    if (spec.replicas < 1) throw std::invalid_argument("replicas must be >= 1");
    if (spec.thetaGrid.empty()) throw std::invalid_argument("theta_grid must be nonempty");
    for (double t : spec.thetaGrid)
        if (t < 0.0 || t > 1.0) throw std::invalid_argument("theta grid values must be in [0,1]");
    return spec;
}

ExperimentSpec parse_spec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open spec file: " + path);
    return parse_spec(in);
}

std::string serialize_spec(const ExperimentSpec& spec) {
    std::ostringstream out;
    out << "kind = " << to_string(spec.kind) << "\n";
    out << "K = " << spec.K << "\n";
    out << "width = " << spec.width << "\n";
    out << "radius = " << spec.radius << "\n";
    out << "theta_grid = ";
    for (std::size_t i = 0; i < spec.thetaGrid.size(); ++i)
        out << (i ? "," : "") << fmt(spec.thetaGrid[i]);
    out << "\n";
    out << "mode = " << to_string(spec.mode) << "\n";
    out << "update = " << to_string(spec.rule.mode) << "\n";
    out << "tie = " << (spec.rule.tieAction == TieAction::Hold ? "hold" : "coin") << "\n";
    out << "tie_bias = " << fmt(spec.rule.tieBias) << "\n";
    out << "m0 = " << spec.rule.thresholdM0 << "\n";
    out << "fallback = " << to_string(spec.rule.fallback) << "\n";
    out << "colors = " << spec.rule.colorCount << "\n";
    out << "majority_color = " << static_cast<int>(spec.rule.majorityColor) << "\n";
    out << "boundary = " << to_string(spec.boundary) << "\n";
    out << "core = "
        << (spec.coreVariantAuto ? "auto" : to_string(spec.coreVariant)) << "\n";
    out << "replicas = " << spec.replicas << "\n";
    out << "horizon = " << fmt(spec.horizon) << "\n";
    out << "steps = " << spec.steps << "\n";
    out << "interior_margin = " << spec.interiorMargin << "\n";
    out << "seed = " << spec.masterSeed << "\n";
    out << "out = " << spec.outDir << "\n";
    out << "metrics = " << spec.metrics << "\n";
    return out.str();
}

std::string spec_hash(const ExperimentSpec& spec) {
    const std::uint64_t h = hash_label(serialize_spec(spec));
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

CoreVariant resolve_core_variant(const ExperimentSpec& spec) {
    if (!spec.coreVariantAuto) return spec.coreVariant;
    if (spec.K >= 5 || spec.kind == TopologyKind::Tree) return CoreVariant::SingleLayer;
    if (spec.width % 2 == 0 && spec.width >= 2) return CoreVariant::DoublyOpen;
    if (spec.width >= 3 && (spec.kind == TopologyKind::StackFreeFinite ||
                            spec.kind == TopologyKind::StackPeriodicFinite))
        return CoreVariant::TriplyOpen;
    return CoreVariant::SingleLayer;
}

std::vector<RunRecord> run_experiment(const ExperimentSpec& spec) {
    const Topology topo = build_topology(spec.kind, spec.K, spec.width, spec.radius);
    validate_rule(spec.rule, topo);
    const CoreVariant variant = resolve_core_variant(spec);
    const CoreBoundaryMode coreBoundary = spec.boundary == BoundaryMode::Clamped
                                              ? CoreBoundaryMode::Wildcard
                                              : CoreBoundaryMode::Free;
    const Spin plus = spec.rule.mode == UpdateMode::Multicolor ? spec.rule.majorityColor
                                                               : Spin{1};
    const std::string hash = spec_hash(spec);

    std::vector<int> interior;
    for (int v = 0; v < topo.vertexCount; ++v)
        if (topo.isInterior(v, spec.interiorMargin)) interior.push_back(v);

    RunOptions options;
    options.horizon = spec.horizon;
    options.boundary = spec.boundary;

    std::vector<RunRecord> records;
    for (int ti = 0; ti < static_cast<int>(spec.thetaGrid.size()); ++ti) {
        const double theta = spec.thetaGrid[ti];
        for (int rep = 0; rep < spec.replicas; ++rep) {
            const auto t0 = std::chrono::steady_clock::now();
            RunRecord rec;
            rec.specHash = hash;
            rec.thetaIndex = ti;
            rec.replica = rep;
            rec.theta = theta;
            rec.seed = derive_seed(spec.masterSeed, "run", static_cast<std::uint64_t>(ti),
                                   static_cast<std::uint64_t>(rep));
            rec.vertexCount = topo.vertexCount;

            SpinConfiguration initial =
                spec.rule.mode == UpdateMode::Multicolor
                    ? sample_initial_multicolor(
                          topo,
                          [&] {
                              // theta mass on the majority color, rest uniform
                              std::vector<double> w(spec.rule.colorCount,
                                                    (1.0 - theta) /
                                                        std::max(1, spec.rule.colorCount - 1));
                              w[spec.rule.majorityColor - 1] = theta;
                              return w;
                          }(),
                          derive_seed(rec.seed, "init"))
                    : sample_initial(topo, theta, derive_seed(rec.seed, "init"));

            const StableCore core = compute_stable_core(topo, initial, variant, coreBoundary);
            rec.coreSize = core.size();

            DynamicsRun run = spec.mode == RunMode::Async
                                  ? run_async(topo, initial, spec.rule, options, rec.seed)
                                  : run_sync(topo, initial, spec.rule, spec.steps, options,
                                             rec.seed);
            rec.absorbed = run.absorbed;

            for (const FlipEvent& e : run.flipLog)
                if (core.contains(e.vertex)) {
                    rec.coreFrozen = false;
                    break;
                }

            long long plusCount = 0;
            bool consensus = !interior.empty();
            for (int v : interior) {
                if (run.finalConfiguration.spins[v] == plus)
                    ++plusCount;
                else
                    consensus = false;
                rec.lastInteriorFlipTime =
                    std::max(rec.lastInteriorFlipTime, run.lastFlipTime[v]);
            }
            rec.interiorPlusFraction =
                interior.empty() ? 0.0 : static_cast<double>(plusCount) / interior.size();
            rec.interiorConsensus = consensus;

            std::vector<Droplet> droplets = droplet_decomposition(topo, core);
            track_droplet_elimination(run, droplets);
            rec.dropletCount = static_cast<int>(droplets.size());
            for (const Droplet& d : droplets) {
                rec.maxDropletSize =
                    std::max(rec.maxDropletSize, static_cast<long long>(d.members.size()));
                const bool allInterior =
                    std::all_of(d.members.begin(), d.members.end(), [&](int v) {
                        return topo.isInterior(v, spec.interiorMargin);
                    });
                if (allInterior) {
                    ++rec.interiorDroplets;
                    if (d.eliminationTime) ++rec.interiorDropletsEliminated;
                }
            }

            rec.wallSeconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            records.push_back(std::move(rec));
        }
    }
    return records;
}

double single_vertex_bound(int K, double theta) {
    return 1.0 - mu_tree_plus_leaf(K, theta);
}

SweepReport sweep_report(const std::vector<RunRecord>& records) {
    std::vector<RunRecord> sorted = records;
    std::sort(sorted.begin(), sorted.end(), [](const RunRecord& a, const RunRecord& b) {
        return std::tie(a.thetaIndex, a.replica) < std::tie(b.thetaIndex, b.replica);
    });

    SweepReport report;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        SweepRow row;
        row.theta = sorted[i].theta;
        long long consensus = 0, absorbed = 0;
        double densitySum = 0.0, flipSum = 0.0;
        int flipped = 0;
        while (j < sorted.size() && sorted[j].thetaIndex == sorted[i].thetaIndex) {
            const RunRecord& r = sorted[j];
            consensus += r.interiorConsensus;
            absorbed += r.absorbed;
            densitySum += r.vertexCount > 0
                              ? static_cast<double>(r.coreSize) / r.vertexCount
                              : 0.0;
            row.maxDropletSize = std::max(row.maxDropletSize, r.maxDropletSize);
            if (r.lastInteriorFlipTime >= 0.0) {
                flipSum += r.lastInteriorFlipTime;
                ++flipped;
            }
            ++j;
        }
        row.replicas = static_cast<int>(j - i);
        row.consensusFraction = static_cast<double>(consensus) / row.replicas;
        row.absorbedFraction = static_cast<double>(absorbed) / row.replicas;
        row.meanCoreDensity = densitySum / row.replicas;
        row.meanLastInteriorFlip = flipped ? flipSum / flipped : -1.0;
        report.rows.push_back(row);
        i = j;
    }
    return report;
}

void write_records_csv(const std::vector<RunRecord>& records, std::ostream& out) {
    out << "spec_hash,theta_index,replica,theta,seed,interior_consensus,"
           "interior_plus_fraction,core_size,core_frozen,droplet_count,max_droplet_size,"
           "interior_droplets,interior_droplets_eliminated,last_interior_flip,absorbed,"
           "vertex_count\n";
    for (const RunRecord& r : records) {
        out << r.specHash << ',' << r.thetaIndex << ',' << r.replica << ','
            << fmt_short(r.theta) << ',' << r.seed << ',' << int{r.interiorConsensus} << ','
            << fmt_short(r.interiorPlusFraction) << ',' << r.coreSize << ','
            << int{r.coreFrozen} << ',' << r.dropletCount << ',' << r.maxDropletSize << ','
            << r.interiorDroplets << ',' << r.interiorDropletsEliminated << ','
            << fmt_short(r.lastInteriorFlipTime) << ',' << int{r.absorbed} << ','
            << r.vertexCount << "\n";
    }
}

void write_summary_csv(const SweepReport& report, std::ostream& out) {
    out << "theta,replicas,consensus_fraction,mean_core_density,max_droplet_size,"
           "mean_last_interior_flip,absorbed_fraction\n";
    for (const SweepRow& r : report.rows) {
        out << fmt_short(r.theta) << ',' << r.replicas << ','
            << fmt_short(r.consensusFraction) << ',' << fmt_short(r.meanCoreDensity) << ','
            << r.maxDropletSize << ',' << fmt_short(r.meanLastInteriorFlip) << ','
            << fmt_short(r.absorbedFraction) << "\n";
    }
}

void write_summary_json(const SweepReport& report, std::ostream& out) {
    nlohmann::json j = nlohmann::json::array();
    for (const SweepRow& r : report.rows) {
        j.push_back({{"theta", r.theta},
                     {"replicas", r.replicas},
                     {"consensusFraction", r.consensusFraction},
                     {"meanCoreDensity", r.meanCoreDensity},
                     {"maxDropletSize", r.maxDropletSize},
                     {"meanLastInteriorFlip", r.meanLastInteriorFlip},
                     {"absorbedFraction", r.absorbedFraction}});
    }
    out << j.dump(2) << "\n";
}

void write_sweep_svg(const SweepReport& report, std::ostream& out) {
    const int w = 480, h = 320, pad = 40;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\">\n";
    out << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
    out << "<line x1=\"" << pad << "\" y1=\"" << h - pad << "\" x2=\"" << w - pad << "\" y2=\""
        << h - pad << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\""
        << h - pad << "\" stroke=\"black\"/>\n";
    if (!report.rows.empty()) {
        double tMin = report.rows.front().theta, tMax = report.rows.back().theta;
        for (const SweepRow& r : report.rows) {
            tMin = std::min(tMin, r.theta);
            tMax = std::max(tMax, r.theta);
        }
        const double span = tMax > tMin ? tMax - tMin : 1.0;
        out << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
        for (const SweepRow& r : report.rows) {
            const double x = pad + (r.theta - tMin) / span * (w - 2 * pad);
            const double y = h - pad - r.consensusFraction * (h - 2 * pad);
            out << fmt_short(x) << ',' << fmt_short(y) << ' ';
        }
        out << "\"/>\n";
    }
    out << "<text x=\"" << w / 2 << "\" y=\"" << h - 8
        << "\" text-anchor=\"middle\" font-size=\"12\">theta</text>\n";
    out << "<text x=\"12\" y=\"" << h / 2
        << "\" font-size=\"12\" transform=\"rotate(-90 12 " << h / 2
        << ")\" text-anchor=\"middle\">interior consensus fraction</text>\n";
    out << "</svg>\n";
}

std::string execute_and_persist(const ExperimentSpec& spec) {
    const std::vector<RunRecord> records = run_experiment(spec);
    const SweepReport report = sweep_report(records);

    namespace fs = std::filesystem;
    const fs::path dir = fs::path(spec.outDir) / ("run-" + spec_hash(spec));
    fs::create_directories(dir);

    std::ofstream(dir / "spec.txt") << serialize_spec(spec);
    {
        std::ofstream out(dir / "records.csv");
        write_records_csv(records, out);
    }
    {
        std::ofstream out(dir / "summary.csv");
        write_summary_csv(report, out);
    }
    {
        std::ofstream out(dir / "summary.json");
        write_summary_json(report, out);
    }
    {
        std::ofstream out(dir / "sweep.svg");
        write_sweep_svg(report, out);
    }
    return dir.string();
}

}  // namespace treestack
