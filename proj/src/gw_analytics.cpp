#include "treestack/gw_analytics.hpp"

#include <cmath>
#include <stdexcept>

#include "treestack/rng.hpp"

namespace treestack {

namespace {

constexpr double kFixedPointTol = 1e-13;
constexpr int kMaxIterations = 100000;

void check_params(int K, double theta) {
    if (K < 3) throw std::invalid_argument("K must be >= 3");
    if (theta < 0.0 || theta > 1.0) throw std::invalid_argument("theta must be in [0,1]");
}

}  // namespace

GWTrace simulate_gw(int K, double theta, int maxGenerations, std::uint64_t seed) {
    check_params(K, theta);
    if (maxGenerations < 0) throw std::invalid_argument("maxGenerations must be >= 0");
    Rng rng(derive_seed(seed, "gw"));
    GWTrace trace;
    trace.K = K;
    trace.theta = theta;
    long long z = rng.bernoulli(theta) ? 1 : 0;
    trace.generations.push_back(z);
    constexpr long long kPopulationCap = 1 << 21;
    for (int n = 0; n < maxGenerations && z > 0 && z < kPopulationCap; ++n) {
        long long next = 0;
        for (long long i = 0; i < z; ++i)
            for (int c = 0; c < K - 1; ++c)
                if (rng.bernoulli(theta)) ++next;
        z = next;
        trace.generations.push_back(z);
    }
    trace.extinct = trace.generations.back() == 0;
    return trace;
}

double binomial_tail(int n, double p, int k) {
    if (k <= 0) return 1.0;
    if (k > n) return 0.0;
    // n is K-1 here, always tiny; direct summation with binomial coefficients.
    double tail = 0.0;
    double coeff = 1.0;
    for (int i = 1; i <= k - 1; ++i) coeff = coeff * (n - i + 1) / i;  // C(n, k-1) staging
    coeff = coeff * (n - k + 1) / k;                                   // C(n, k)
    for (int i = k; i <= n; ++i) {
        tail += coeff * std::pow(p, i) * std::pow(1.0 - p, n - i);
        coeff = coeff * (n - i) / (i + 1);
    }
    return std::min(1.0, std::max(0.0, tail));
}

FixedPointResult gw_extinction(int K, double theta) {
    check_params(K, theta);
    FixedPointResult r;
    r.K = K;
    r.theta = theta;
    double s = 0.0;
    for (int i = 0; i < kMaxIterations; ++i) {
        const double next = std::pow((1.0 - theta) + theta * s, K - 1);
        r.iterations = i + 1;
        r.residual = std::abs(next - s);
        s = next;
        if (r.residual <= kFixedPointTol) break;
    }
    r.value = s;
    return r;
}

FixedPointResult tau(int K, double theta) {
    check_params(K, theta);
    FixedPointResult r;
    r.K = K;
    r.theta = theta;
    // Survival-type quantity: iterate from 1 down to the largest root.
    double g = 1.0;
    for (int i = 0; i < kMaxIterations; ++i) {
        const double next = theta * binomial_tail(K - 1, g, K - 2);
        r.iterations = i + 1;
        r.residual = std::abs(next - g);
        g = next;
        if (r.residual <= kFixedPointTol) break;
    }
    r.value = g;
    return r;
}

FixedPointResult tau_tilde(int K, double theta) {
    FixedPointResult r = tau(K, theta);
    r.value = theta * std::pow(r.value, K - 2);
    return r;
}

double mu_tree_plus_leaf(int K, double theta) {
    return theta * std::pow(tau(K, theta).value, K - 1);
}

double mu_tree_plus_pair(int K, double theta) {
    const double tt = tau_tilde(K, theta).value;
    return tt * tt;
}

double epsilon1(int K) { return 1.0 / (static_cast<double>(K) * (K - 1)); }

double epsilon2(int K) {
    return (static_cast<double>(K) * K - 3.0 * K + 4.0) / (2.0 * K * (K - 1));
}

double lambda_star(int K, double theta) {
    const double leafBase = 1.0 - mu_tree_plus_leaf(K, theta);
    const double pairBase = 1.0 - mu_tree_plus_pair(K, theta);
    return std::min(std::pow(leafBase, epsilon1(K)), std::pow(pairBase, epsilon2(K) / 2.0));
}

ThetaStarResult theta_star_bound(int K, double gridStep) {
    if (gridStep <= 0.0) throw std::invalid_argument("gridStep must be positive");
    const double target = 1.0 / (K + 1);
    ThetaStarResult result;
    double hi = 1.0 - 1e-12;
    result.lambdaNearOne = lambda_star(K, 1.0 - 1e-9);
    if (lambda_star(K, hi) >= target) {
        result.found = false;
        return result;
    }
    double lo = 0.0;  // lambda* is 1 there
    while (hi - lo > gridStep) {
        const double mid = 0.5 * (lo + hi);
        if (lambda_star(K, mid) < target)
            hi = mid;
        else
            lo = mid;
    }
    result.found = true;
    result.theta = hi;
    result.lambdaAtTheta = lambda_star(K, hi);
    return result;
}

double tau_finite_depth(int K, double theta, int depth) {
    check_params(K, theta);
    double g = theta;  // wildcard cutoff: a leaf carries iff its spin is +1
    for (int d = 0; d < depth; ++d) g = theta * binomial_tail(K - 1, g, K - 2);
    return g;
}

double tau_truncation_allowance(int K, double theta, int depth) {
    // The finite-depth values decrease geometrically toward the fixed point;
    // estimate the remaining tail from two consecutive gaps.
    const double g0 = tau_finite_depth(K, theta, depth);
    const double g2 = tau_finite_depth(K, theta, depth + 2);
    const double g4 = tau_finite_depth(K, theta, depth + 4);
    const double a = g0 - g2;
    const double b = g2 - g4;
    if (a <= 0.0) return 1e-12;
    const double r = b / a;
    if (r >= 0.999) return a * 1e3;  // convergence too slow to extrapolate
    return a / (1.0 - r);
}

EventKind event_kind_from_string(const std::string& s) {
    if (s == "branch" || s == "tau") return EventKind::Branch;
    if (s == "branch_pair" || s == "tautilde") return EventKind::BranchPair;
    if (s == "leaf") return EventKind::Leaf;
    if (s == "pair") return EventKind::Pair;
    throw std::invalid_argument("unknown event kind: " + s);
}

namespace {

struct McKernel {
    double theta;
    int branches;  // children per node: K-1
    int need;      // children that must carry: K-2
    double leafFail;  // P(fewer than K-2 of K-1 spins are +1), for the last level

    // Does this node carry a rooted all-+1 subtree in which every vertex
    // keeps K-2 of its K-1 available children? Lazy with early exit; at
    // depth 1 the children are plain spins, aggregated through one
    // inverse-CDF comparison instead of K-1 separate draws.
    bool carries(Rng& rng, int depth) const {
        if (rng.u01() >= theta) return false;
        if (depth == 0) return true;
        if (depth == 1) return rng.u01() >= leafFail;
        int succ = 0, fail = 0;
        const int allowedFailures = branches - need;
        for (int c = 0; c < branches; ++c) {
            if (carries(rng, depth - 1)) {
                if (++succ == need) return true;
            } else if (++fail > allowedFailures) {
                return false;
            }
        }
        return succ >= need;
    }
};

}  // namespace

McEstimate mc_estimate_event(EventKind kind, int K, double theta, int depth,
                             long long samples, std::uint64_t seed) {
    check_params(K, theta);
    if (depth < 1) throw std::invalid_argument("depth must be >= 1");
    if (samples < 1) throw std::invalid_argument("samples must be >= 1");

    McKernel kernel;
    kernel.theta = theta;
    kernel.branches = K - 1;
    kernel.need = K - 2;
    kernel.leafFail = 1.0 - binomial_tail(K - 1, theta, K - 2);

    Rng rng(derive_seed(seed, "mc-event", static_cast<std::uint64_t>(kind), depth));
    long long hits = 0;
    for (long long i = 0; i < samples; ++i) {
        bool ok = false;
        switch (kind) {
            case EventKind::Branch:
                ok = kernel.carries(rng, depth);
                break;
            case EventKind::BranchPair: {
                // Root has only K-2 available branches, all of them needed.
                ok = rng.u01() < theta;
                for (int c = 0; ok && c < K - 2; ++c) ok = kernel.carries(rng, depth - 1);
                break;
            }
            case EventKind::Leaf: {
                ok = rng.u01() < theta;
                for (int c = 0; ok && c < K - 1; ++c) ok = kernel.carries(rng, depth - 1);
                break;
            }
            case EventKind::Pair: {
                ok = true;
                for (int half = 0; ok && half < 2; ++half) {
                    ok = rng.u01() < theta;
                    for (int c = 0; ok && c < K - 2; ++c) ok = kernel.carries(rng, depth - 1);
                }
                break;
            }
        }
        if (ok) ++hits;
    }

    McEstimate est;
    est.samples = samples;
    est.successes = hits;
    est.estimate = static_cast<double>(hits) / samples;
    est.stderr_ = std::sqrt(est.estimate * (1.0 - est.estimate) / samples);
    return est;
}

}  // namespace treestack
