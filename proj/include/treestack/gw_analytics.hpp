#ifndef TREESTACK_GW_ANALYTICS_HPP
#define TREESTACK_GW_ANALYTICS_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace treestack {

// Fixed-point computations behind the droplet-size estimates: survival-type
// probabilities of rooted (K-1)-ary all-+1 subtree events, and the decay base
// lambda* they control.

struct FixedPointResult {
    double value = 0.0;
    int iterations = 0;
    double residual = 0.0;
    int K = 0;
    double theta = 0.0;
};

struct GWTrace {
    std::vector<long long> generations;  // Z_0, Z_1, ...
    int K = 0;
    double theta = 0.0;
    bool extinct = false;
};

// Branching process with Bin(K-1, theta) offspring; Z_0 ~ Bernoulli(theta).
GWTrace simulate_gw(int K, double theta, int maxGenerations, std::uint64_t seed);

// Smallest fixed point in [0,1] of s -> ((1-theta) + theta*s)^(K-1).
FixedPointResult gw_extinction(int K, double theta);

// P(Bin(n, p) >= k), exact summation (n is tiny here).
double binomial_tail(int n, double p, int k);

// Largest fixed point of g -> theta * P(Bin(K-1, g) >= K-2): probability that
// a branch root carries a rooted subtree in which every vertex keeps K-2 of
// its K-1 available children.
FixedPointResult tau(int K, double theta);

// theta * g^(K-2) at the tau fixed point: the root has only K-2 available
// branches and all of them must carry.
FixedPointResult tau_tilde(int K, double theta);

double mu_tree_plus_leaf(int K, double theta);  // theta * tau^(K-1)
double mu_tree_plus_pair(int K, double theta);  // tau_tilde^2

double epsilon1(int K);  // 1 / (K(K-1))
double epsilon2(int K);  // (K^2 - 3K + 4) / (2K(K-1))

// min{ (1-mu_leaf)^eps1, (1-mu_pair)^(eps2/2) }
double lambda_star(int K, double theta);

struct ThetaStarResult {
    bool found = false;
    double theta = 1.0;
    double lambdaAtTheta = 1.0;
    double lambdaNearOne = 1.0;  // reported when not found
};

// Smallest theta (to gridStep resolution) with lambda*(K, theta) < 1/(K+1).
ThetaStarResult theta_star_bound(int K, double gridStep);

// Finite-depth truncation of the tau recursion: value of the depth-d event
// with wildcard cutoff. Used for truncation allowances of the MC oracle.
double tau_finite_depth(int K, double theta, int depth);

// Geometric-tail estimate of |g_depth - g_infinity| from consecutive
// truncation levels.
double tau_truncation_allowance(int K, double theta, int depth);

// Direct Monte Carlo of the subtree events on a depth-truncated branch
// region (wildcard cutoff). Lazy exploration; never consults the fixed-point
// recursions. The oracle side of the dual-route check.
enum class EventKind {
    Branch,      // rooted event behind tau: root needs K-2 of K-1 branches
    BranchPair,  // rooted event behind tau_tilde: root has K-2 branches, all needed
    Leaf,        // Tree+[v]: spin at v plus all K-1 branches carry
    Pair         // Tree+[v,w]: two independent BranchPair factors
};

EventKind event_kind_from_string(const std::string& s);

struct McEstimate {
    double estimate = 0.0;
    double stderr_ = 0.0;
    long long samples = 0;
    long long successes = 0;
};

McEstimate mc_estimate_event(EventKind kind, int K, double theta, int depth,
                             long long samples, std::uint64_t seed);

}  // namespace treestack

#endif
