#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

// Delay-avalanche model on random graphs: accumulated delays d_i, threshold
// toppling with amplification m and per-edge transmission probability, driven
// by periodic or stochastic unit insertions at a single node.

namespace railsync::avalanche {

struct AvaGraph {
    int n = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<std::vector<int>> adj;

    int m() const { return static_cast<int>(edges.size()); }
};

// Uniform G(N, M) conditioned on connectivity (resampled until connected).
AvaGraph random_graph(int n, int m, std::uint64_t seed);

enum class DriverKind { periodic, stochastic };

// instantaneous: each insertion relaxes to quiescence before time advances;
// one avalanche per triggering insertion. concurrent: one synchronous
// toppling round per time step, insertions keep arriving while a cascade is
// rolling and an avalanche is a maximal run of toppling steps.
enum class InsertionMode { instantaneous, concurrent };

struct AvaParams {
    // 0.1 keeps the N=70, M=240 reference configuration subcritical with a
    // clean exponential tail; values past ~0.2 run away and trip the guard.
    double p_trans = 0.1;       // transmission probability per (node, neighbor)
    double amplification = 0.9; // m: each successful neighbor receives m * d_i
    double threshold = 4.0;     // T: topple while d_i > T
    int driver_period = 17;     // periodic: insert when t % P == 0; stochastic: Bernoulli(1/P)
    DriverKind driver = DriverKind::periodic;
    InsertionMode mode = InsertionMode::instantaneous;
    double unit = 1.0;
    long long max_topplings = 1'000'000;  // guard against the supercritical regime
    int driver_node = 0;
};

struct AvaRun {
    std::vector<long long> lengths;    // topplings per avalanche
    std::vector<long long> durations;  // synchronous rounds per avalanche
    std::vector<double> final_delays;  // d_i after the last step
    long long insertions = 0;
    long long steps_run = 0;
    bool aborted = false;  // guard tripped
};

AvaRun run(const AvaGraph& g, const AvaParams& params, long long steps, std::uint64_t seed);

struct AvaStats {
    long long avalanche_count = 0;
    double mean_length = 0.0;
    std::map<long long, long long> histogram;
    // Least-squares fit of log10(count) vs length over lengths above the
    // histogram mode; absent when fewer than two tail points exist.
    std::optional<double> tail_slope;
    std::optional<double> tail_r2;
};

// Absent when no avalanche was recorded.
std::optional<AvaStats> avalanche_stats(std::span<const AvaRun> runs);

struct DriverComparison {
    std::vector<std::pair<double, double>> per_seed;  // (periodic mean, stochastic mean)
    double periodic_mean = 0.0;
    double stochastic_mean = 0.0;
};

// Same graph and parameters for both drivers, runs paired by seed index.
DriverComparison compare_drivers(const AvaGraph& g, const AvaParams& params, long long steps,
                                 int n_seeds, std::uint64_t master_seed, unsigned threads = 1);

std::string params_json(const AvaGraph& g, const AvaParams& params, long long steps);

}  // namespace railsync::avalanche
