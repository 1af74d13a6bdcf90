#include "railsync/avalanche.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "railsync/parallel.hpp"
#include "railsync/rng.hpp"
#include "railsync/stats.hpp"

namespace railsync::avalanche {

AvaGraph random_graph(int n, int m, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("random_graph: need at least two nodes");
    const long long max_edges = static_cast<long long>(n) * (n - 1) / 2;
    if (m < n - 1 || m > max_edges)
        throw std::invalid_argument("random_graph: infeasible edge count " + std::to_string(m) +
                                    " for " + std::to_string(n) + " nodes");
    auto rng = make_engine(derive_seed(seed, "ava-graph"));
    std::uniform_int_distribution<int> pick(0, n - 1);

    AvaGraph g;
    g.n = n;
    std::vector<int> component(n);
    for (int attempt = 0;; ++attempt) {
        if (attempt > 100000)
            throw std::runtime_error("random_graph: failed to sample a connected graph");
        std::vector<std::pair<int, int>> edges;
        std::vector<std::vector<int>> adj(n);
        std::vector<std::uint64_t> present;
        present.assign((static_cast<std::size_t>(n) * n + 63) / 64, 0);
        const auto has = [&](int a, int b) {
            const std::size_t idx = static_cast<std::size_t>(a) * n + b;
            return (present[idx / 64] >> (idx % 64)) & 1u;
        };
        const auto mark = [&](int a, int b) {
            const std::size_t idx = static_cast<std::size_t>(a) * n + b;
            present[idx / 64] |= std::uint64_t{1} << (idx % 64);
        };
        while (static_cast<int>(edges.size()) < m) {
            int a = pick(rng), b = pick(rng);
            if (a == b || has(a, b)) continue;
            mark(a, b);
            mark(b, a);
            edges.emplace_back(std::min(a, b), std::max(a, b));
            adj[a].push_back(b);
            adj[b].push_back(a);
        }
        // connectivity check
        std::fill(component.begin(), component.end(), 0);
        std::vector<int> stack{0};
        component[0] = 1;
        int seen = 1;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int w : adj[v]) {
                if (!component[w]) {
                    component[w] = 1;
                    ++seen;
                    stack.push_back(w);
                }
            }
        }
        if (seen == n) {
            std::sort(edges.begin(), edges.end());
            g.edges = std::move(edges);
            g.adj.assign(n, {});
            for (const auto& [a, b] : g.edges) {
                g.adj[a].push_back(b);
                g.adj[b].push_back(a);
            }
            return g;
        }
    }
}

namespace {

struct Cascade {
    long long topplings = 0;
    long long rounds = 0;
    bool guard_tripped = false;
};

// One synchronous round: every supercritical node distributes m*d to each
// neighbor that wins its coin, then resets to 0. Returns the toppling count.
long long toppling_round(const AvaGraph& g, const AvaParams& p, std::vector<double>& d,
                         std::vector<int>& hot, std::mt19937_64& rng) {
    hot.clear();
    for (int v = 0; v < g.n; ++v)
        if (d[v] > p.threshold) hot.push_back(v);
    if (hot.empty()) return 0;
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::vector<std::pair<int, double>> receipts;
    for (int v : hot) {
        const double amount = p.amplification * d[v];
        for (int w : g.adj[v])
            if (coin(rng) < p.p_trans) receipts.emplace_back(w, amount);
    }
    for (int v : hot) d[v] = 0.0;
    for (const auto& [w, amount] : receipts) d[w] += amount;
    return static_cast<long long>(hot.size());
}

// Full relaxation to quiescence after one insertion.
Cascade relax(const AvaGraph& g, const AvaParams& p, std::vector<double>& d,
              std::vector<int>& hot, std::mt19937_64& rng) {
    Cascade c;
    for (;;) {
        const long long t = toppling_round(g, p, d, hot, rng);
        if (t == 0) break;
        c.topplings += t;
        ++c.rounds;
        if (c.topplings > p.max_topplings) {
            c.guard_tripped = true;
            break;
        }
    }
    return c;
}

}  // namespace

AvaRun run(const AvaGraph& g, const AvaParams& params, long long steps, std::uint64_t seed) {
    if (steps < 1) throw std::invalid_argument("run: need at least one step");
    if (params.p_trans < 0 || params.p_trans > 1)
        throw std::invalid_argument("run: transmission probability outside [0, 1]");
    if (params.driver_period < 1) throw std::invalid_argument("run: driver period must be >= 1");
    if (params.driver_node < 0 || params.driver_node >= g.n)
        throw std::invalid_argument("run: driver node out of range");

    auto rng = make_engine(derive_seed(seed, "ava-run"));
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    const double insert_prob = 1.0 / static_cast<double>(params.driver_period);

    AvaRun result;
    std::vector<double> d(g.n, 0.0);
    std::vector<int> hot;

    if (params.mode == InsertionMode::instantaneous) {
        for (long long t = 1; t <= steps; ++t) {
            ++result.steps_run;
            const bool insert = params.driver == DriverKind::periodic
                                    ? (t % params.driver_period == 0)
                                    : (coin(rng) < insert_prob);
            if (!insert) continue;
            ++result.insertions;
            d[params.driver_node] += params.unit;
            const Cascade c = relax(g, params, d, hot, rng);
            if (c.guard_tripped) {
                result.aborted = true;  // unfinished cascade is not recorded
                return result;
            }
            if (c.topplings > 0) {
                result.lengths.push_back(c.topplings);
                result.durations.push_back(c.rounds);
            }
        }
        result.final_delays = d;
        return result;
    } else {
        // insertions keep arriving while a cascade rolls; an avalanche is a
        // maximal run of consecutive toppling steps
        long long cascade_topplings = 0;
        long long cascade_rounds = 0;
        for (long long t = 1; t <= steps; ++t) {
            ++result.steps_run;
            const bool insert = params.driver == DriverKind::periodic
                                    ? (t % params.driver_period == 0)
                                    : (coin(rng) < insert_prob);
            if (insert) {
                ++result.insertions;
                d[params.driver_node] += params.unit;
            }
            const long long toppled = toppling_round(g, params, d, hot, rng);
            if (toppled > 0) {
                cascade_topplings += toppled;
                ++cascade_rounds;
                if (cascade_topplings > params.max_topplings) {
                    result.aborted = true;
                    break;
                }
            } else if (cascade_topplings > 0) {
                result.lengths.push_back(cascade_topplings);
                result.durations.push_back(cascade_rounds);
                cascade_topplings = 0;
                cascade_rounds = 0;
            }
        }
        if (cascade_topplings > 0 && !result.aborted) {
            result.lengths.push_back(cascade_topplings);
            result.durations.push_back(cascade_rounds);
        }
    }
    result.final_delays = d;
    return result;
}

std::optional<AvaStats> avalanche_stats(std::span<const AvaRun> runs) {
    AvaStats stats;
    double total = 0;
    for (const AvaRun& r : runs) {
        for (long long len : r.lengths) {
            ++stats.avalanche_count;
            total += static_cast<double>(len);
            ++stats.histogram[len];
        }
    }
    if (stats.avalanche_count == 0) return std::nullopt;
    stats.mean_length = total / static_cast<double>(stats.avalanche_count);

    long long mode_length = 0;
    long long mode_count = -1;
    for (const auto& [len, count] : stats.histogram) {
        if (count > mode_count) {
            mode_count = count;
            mode_length = len;
        }
    }
    std::vector<double> xs, ys;
    for (const auto& [len, count] : stats.histogram) {
        if (len <= mode_length) continue;
        xs.push_back(static_cast<double>(len));
        ys.push_back(std::log10(static_cast<double>(count)));
    }
    if (xs.size() >= 2) {
        const LinearFit fit = linear_fit(xs, ys);
        stats.tail_slope = fit.slope;
        stats.tail_r2 = fit.r2;
    }
    return stats;
}

DriverComparison compare_drivers(const AvaGraph& g, const AvaParams& params, long long steps,
                                 int n_seeds, std::uint64_t master_seed, unsigned threads) {
    if (n_seeds < 2) throw std::invalid_argument("compare_drivers: need at least two seeds");
    DriverComparison cmp;
    cmp.per_seed.assign(n_seeds, {0.0, 0.0});
    parallel_for(static_cast<std::size_t>(n_seeds) * 2, threads, [&](std::size_t job) {
        const int seed_index = static_cast<int>(job / 2);
        const bool periodic = job % 2 == 0;
        AvaParams p = params;
        p.driver = periodic ? DriverKind::periodic : DriverKind::stochastic;
        const std::uint64_t seed =
            derive_seed(master_seed, static_cast<std::uint64_t>(seed_index), periodic ? 1 : 2);
        const AvaRun r = run(g, p, steps, seed);
        double mean_len = 0;
        if (!r.lengths.empty()) {
            for (long long len : r.lengths) mean_len += static_cast<double>(len);
            mean_len /= static_cast<double>(r.lengths.size());
        }
        if (periodic) cmp.per_seed[seed_index].first = mean_len;
        else cmp.per_seed[seed_index].second = mean_len;
    });
    double sp = 0, ss = 0;
    for (const auto& [p, s] : cmp.per_seed) {
        sp += p;
        ss += s;
    }
    cmp.periodic_mean = sp / n_seeds;
    cmp.stochastic_mean = ss / n_seeds;
    return cmp;
}

std::string params_json(const AvaGraph& g, const AvaParams& params, long long steps) {
    nlohmann::json j;
    j["n"] = g.n;
    j["m"] = g.m();
    j["p_trans"] = params.p_trans;
    j["amplification"] = params.amplification;
    j["threshold"] = params.threshold;
    j["driver_period"] = params.driver_period;
    j["driver"] = params.driver == DriverKind::periodic ? "periodic" : "stochastic";
    j["mode"] = params.mode == InsertionMode::instantaneous ? "instantaneous" : "concurrent";
    j["unit"] = params.unit;
    j["max_topplings"] = params.max_topplings;
    j["driver_node"] = params.driver_node;
    j["steps"] = steps;
    return j.dump();
}

}  // namespace railsync::avalanche
