#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "treestack/dynamics.hpp"
#include "treestack/gw_analytics.hpp"
#include "treestack/harness.hpp"
#include "treestack/rng.hpp"
#include "treestack/stable_core.hpp"
#include "treestack/topology.hpp"
#include "treestack/tree_lemmas.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitAcceptance = 3;

// "a:b:n" for n evenly spaced points, or a comma list.
std::vector<double> parse_theta_grid(const std::string& s) {
    std::vector<double> grid;
    if (s.find(':') != std::string::npos) {
        double a, b;
        int n;
        char c1, c2;
        std::istringstream in(s);
        if (!(in >> a >> c1 >> b >> c2 >> n) || c1 != ':' || c2 != ':' || n < 1)
            throw std::invalid_argument("bad grid spec: " + s);
        for (int i = 0; i < n; ++i)
            grid.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
        return grid;
    }
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) grid.push_back(std::stod(tok));
    if (grid.empty()) throw std::invalid_argument("empty grid spec");
    return grid;
}

int cmd_simulate(const std::string& specFile, std::optional<std::uint64_t> seed,
                 std::optional<std::string> out) {
    treestack::ExperimentSpec spec = treestack::parse_spec_file(specFile);
    if (seed) spec.masterSeed = *seed;
    if (out) spec.outDir = *out;
    const std::string dir = treestack::execute_and_persist(spec);
    std::cout << "run directory: " << dir << "\n";
    std::ifstream summary(dir + "/summary.csv");
    std::cout << summary.rdbuf();
    return kExitOk;
}

int cmd_analytics(int K, const std::string& gridSpec) {
    const std::vector<double> grid = parse_theta_grid(gridSpec);
    std::cout << "theta,tau,tau_tilde,mu_leaf,mu_pair,lambda_star\n";
    char buf[256];
    for (double theta : grid) {
        std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n", theta,
                      treestack::tau(K, theta).value, treestack::tau_tilde(K, theta).value,
                      treestack::mu_tree_plus_leaf(K, theta),
                      treestack::mu_tree_plus_pair(K, theta), treestack::lambda_star(K, theta));
        std::cout << buf;
    }
    const treestack::ThetaStarResult ts = treestack::theta_star_bound(K, 1e-6);
    if (ts.found)
        std::snprintf(buf, sizeof buf, "# theta_star_bound: %.10g (lambda* = %.10g)\n", ts.theta,
                      ts.lambdaAtTheta);
    else
        std::snprintf(buf, sizeof buf,
                      "# theta_star_bound: not found (lambda* near 1: %.10g)\n",
                      ts.lambdaNearOne);
    std::cout << buf;
    return kExitOk;
}

int cmd_lemmas(int instances, std::uint64_t seed) {
    long long failures = 0, checked = 0;
    for (int K : {3, 4, 5}) {
        const treestack::Topology ball =
            treestack::build_topology(treestack::TopologyKind::Tree, K, 1, 5);
        treestack::Rng rng(treestack::derive_seed(seed, "lemmas", K));
        for (int i = 0; i < instances; ++i) {
            const int size = 2 + static_cast<int>(rng.uniform_index(12));
            std::vector<int> lambda;
            for (int j = 0; j < size; ++j)
                lambda.push_back(static_cast<int>(rng.uniform_index(ball.vertexCount)));
            std::sort(lambda.begin(), lambda.end());
            lambda.erase(std::unique(lambda.begin(), lambda.end()), lambda.end());
            if (lambda.size() < 2) continue;
            ++checked;
            try {
                const treestack::SteinerTree tree = treestack::steiner_subtree(ball, lambda);
                treestack::check_lemma_b3(ball, tree);
                const treestack::EventFamily family = treestack::build_event_family(ball, tree);
                if (!family.witnessesDisjoint) {
                    ++failures;
                    std::cerr << "witness overlap at K=" << K << " instance " << i << "\n";
                }
            } catch (const std::exception& e) {
                ++failures;
                std::cerr << "lemma failure at K=" << K << " instance " << i << ": " << e.what()
                          << "\n";
            }
        }
    }
    std::cout << "lemma selftest: " << checked << " instances, " << failures << " failures\n";
    return failures == 0 ? kExitOk : kExitAcceptance;
}

int cmd_oracle(const std::string& event, int K, double theta, int depth, long long samples,
               std::uint64_t seed) {
    const treestack::EventKind kind = treestack::event_kind_from_string(event);
    const treestack::McEstimate mc =
        treestack::mc_estimate_event(kind, K, theta, depth, samples, seed);
    double analytic = 0.0;
    const double g = treestack::tau_finite_depth(K, theta, depth - 1);
    switch (kind) {
        case treestack::EventKind::Branch:
            analytic = treestack::tau_finite_depth(K, theta, depth);
            break;
        case treestack::EventKind::BranchPair:
            analytic = theta * std::pow(g, K - 2);
            break;
        case treestack::EventKind::Leaf:
            analytic = theta * std::pow(g, K - 1);
            break;
        case treestack::EventKind::Pair: {
            const double half = theta * std::pow(g, K - 2);
            analytic = half * half;
            break;
        }
    }
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "event=%s K=%d theta=%.10g depth=%d\nmc=%.10g stderr=%.3g samples=%lld\n"
                  "finite_depth_analytic=%.10g fixed_point_limit=%.10g allowance=%.3g\n",
                  event.c_str(), K, theta, depth, mc.estimate, mc.stderr_,
                  static_cast<long long>(mc.samples), analytic,
                  kind == treestack::EventKind::Branch
                      ? treestack::tau(K, theta).value
                      : (kind == treestack::EventKind::Leaf
                             ? treestack::mu_tree_plus_leaf(K, theta)
                             : (kind == treestack::EventKind::Pair
                                    ? treestack::mu_tree_plus_pair(K, theta)
                                    : treestack::tau_tilde(K, theta).value)),
                  treestack::tau_truncation_allowance(K, theta, depth));
    std::cout << buf;
    const double gap = std::abs(mc.estimate - analytic);
    if (gap > 4.0 * mc.stderr_ + 1e-9) {
        std::cerr << "oracle disagreement beyond 4 sigma\n";
        return kExitAcceptance;
    }
    return kExitOk;
}

int cmd_report(const std::string& runDir) {
    std::ifstream in(runDir + "/records.csv");
    if (!in) throw std::invalid_argument("cannot open " + runDir + "/records.csv");
    std::string line;
    std::getline(in, line);  // header
    std::vector<treestack::RunRecord> records;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string f;
        treestack::RunRecord r;
        auto next = [&] {
            std::getline(ss, f, ',');
            return f;
        };
        r.specHash = next();
        r.thetaIndex = std::stoi(next());
        r.replica = std::stoi(next());
        r.theta = std::stod(next());
        r.seed = std::stoull(next());
        r.interiorConsensus = std::stoi(next());
        r.interiorPlusFraction = std::stod(next());
        r.coreSize = std::stoll(next());
        r.coreFrozen = std::stoi(next());
        r.dropletCount = std::stoi(next());
        r.maxDropletSize = std::stoll(next());
        r.interiorDroplets = std::stoi(next());
        r.interiorDropletsEliminated = std::stoi(next());
        r.lastInteriorFlipTime = std::stod(next());
        r.absorbed = std::stoi(next());
        r.vertexCount = std::stoi(next());
        records.push_back(std::move(r));
    }
    const treestack::SweepReport report = treestack::sweep_report(records);
    treestack::write_summary_csv(report, std::cout);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tree-stack majority dynamics toolkit"};
    app.require_subcommand(1);

    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    int jobs = 1;
    app.add_option("--seed", seed, "master seed override");
    app.add_option("--jobs", jobs, "worker count (single-host)")->envname("TREESTACK_JOBS");
    app.add_option("--out", out, "output directory override")->envname("TREESTACK_OUT");

    auto* simulate = app.add_subcommand("simulate", "run an experiment spec file");
    std::string specFile;
    simulate->add_option("spec-file", specFile, "experiment spec")->required();

    auto* analytics = app.add_subcommand("analytics", "fixed-point table over a theta grid");
    int K = 5;
    std::string gridSpec = "0.8:0.99:20";
    analytics->add_option("--K", K, "tree degree")->required();
    analytics->add_option("--theta-grid", gridSpec, "a:b:n or comma list");

    auto* lemmas = app.add_subcommand("lemmas", "Steiner combinatorics selftest");
    bool selftest = false;
    int instances = 200;
    lemmas->add_flag("--selftest", selftest, "run the randomized selftest");
    lemmas->add_option("--instances", instances, "instances per K");

    auto* oracle = app.add_subcommand("oracle", "Monte Carlo event oracle");
    std::string event = "leaf";
    double theta = 0.95;
    int depth = 8;
    long long samples = 100000;
    oracle->add_option("--event", event, "branch|branch_pair|leaf|pair")->required();
    oracle->add_option("--K", K, "tree degree")->required();
    oracle->add_option("--theta", theta, "plus density")->required();
    oracle->add_option("--depth", depth, "truncation depth")->required();
    oracle->add_option("--samples", samples, "sample count");

    auto* report = app.add_subcommand("report", "summarize a run directory");
    std::string runDir;
    report->add_option("run-dir", runDir, "directory produced by simulate")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (*simulate) return cmd_simulate(specFile, seed, out);
        if (*analytics) return cmd_analytics(K, gridSpec);
        if (*lemmas) {
            if (!selftest) {
                std::cerr << "lemmas requires --selftest\n";
                return kExitValidation;
            }
            return cmd_lemmas(instances, seed.value_or(1));
        }
        if (*oracle) return cmd_oracle(event, K, theta, depth, samples, seed.value_or(1));
        if (*report) return cmd_report(runDir);
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitAcceptance;
    }
    return kExitOk;
}
