#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "railsync/avalanche.hpp"

using namespace railsync::avalanche;

namespace {

AvaGraph ring(int n) {
    AvaGraph g;
    g.n = n;
    g.adj.assign(n, {});
    for (int i = 0; i < n; ++i) {
        const int j = (i + 1) % n;
        g.edges.emplace_back(std::min(i, j), std::max(i, j));
        g.adj[i].push_back(j);
        g.adj[j].push_back(i);
    }
    return g;
}

}  // namespace

TEST_CASE("random_graph with forced parameters yields K4") {
    const AvaGraph g = random_graph(4, 6, 9);
    CHECK(g.n == 4);
    CHECK(g.m() == 6);
    std::set<std::pair<int, int>> edges(g.edges.begin(), g.edges.end());
    CHECK(edges.size() == 6);
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) CHECK(edges.count({a, b}) == 1);
}

TEST_CASE("random_graph reference size is connected and deterministic") {
    const AvaGraph a = random_graph(70, 240, 2024);
    CHECK(a.n == 70);
    CHECK(a.m() == 240);
    // connectivity via simple reachability
    std::vector<int> seen(a.n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int w : a.adj[v])
            if (!seen[w]) {
                seen[w] = 1;
                ++count;
                stack.push_back(w);
            }
    }
    CHECK(count == 70);
    const AvaGraph b = random_graph(70, 240, 2024);
    CHECK(a.edges == b.edges);
    const AvaGraph c = random_graph(70, 240, 2025);
    CHECK(a.edges != c.edges);
}

TEST_CASE("random_graph rejects infeasible sizes") {
    CHECK_THROWS_AS(random_graph(5, 3, 1), std::invalid_argument);   // below n-1
    CHECK_THROWS_AS(random_graph(5, 11, 1), std::invalid_argument);  // above n(n-1)/2
}

TEST_CASE("zero transmission: driver topples alone on every 5th insertion") {
    const AvaGraph g = random_graph(10, 20, 3);
    AvaParams params;
    params.p_trans = 0.0;
    params.threshold = 4.0;
    params.driver = DriverKind::periodic;
    params.driver_period = 17;
    const long long steps = 17 * 50;  // exactly 50 insertions
    const AvaRun r = run(g, params, steps, 5);
    CHECK(r.insertions == 50);
    CHECK(r.lengths.size() == 10);  // every 5th insertion crosses the threshold
    for (long long len : r.lengths) CHECK(len == 1);
    for (long long d : r.durations) CHECK(d == 1);
}

TEST_CASE("zero amplification gives only length-1 avalanches") {
    const AvaGraph g = random_graph(20, 40, 3);
    AvaParams params;
    params.p_trans = 1.0;
    params.amplification = 0.0;
    params.driver = DriverKind::stochastic;
    const AvaRun r = run(g, params, 20000, 7);
    CHECK(!r.lengths.empty());
    for (long long len : r.lengths) CHECK(len == 1);
}

TEST_CASE("runs are pure functions of the seed") {
    const AvaGraph g = random_graph(30, 60, 4);
    AvaParams params;
    const AvaRun a = run(g, params, 50000, 11);
    const AvaRun b = run(g, params, 50000, 11);
    CHECK(a.lengths == b.lengths);
    CHECK(a.insertions == b.insertions);
    const AvaRun c = run(g, params, 50000, 12);
    CHECK(a.lengths != c.lengths);
}

TEST_CASE("stochastic driver inserts at rate 1/P") {
    const AvaGraph g = random_graph(10, 20, 3);
    AvaParams params;
    params.driver = DriverKind::stochastic;
    params.driver_period = 17;
    const long long steps = 100000;
    const AvaRun r = run(g, params, steps, 21);
    const double rate = static_cast<double>(r.insertions) / static_cast<double>(steps);
    CHECK(rate == doctest::Approx(1.0 / 17.0).epsilon(0.03));
}

TEST_CASE("supercritical configuration trips the guard instead of hanging") {
    const AvaGraph g = ring(6);
    AvaParams params;
    params.p_trans = 1.0;
    params.amplification = 1.0;
    params.threshold = 4.0;
    params.max_topplings = 10000;
    const AvaRun r = run(g, params, 1000, 3);
    CHECK(r.aborted);
}

TEST_CASE("relaxation always ends at or below the threshold") {
    const AvaGraph g = random_graph(25, 60, 8);
    AvaParams params;
    params.p_trans = 0.1;
    params.amplification = 0.9;
    const AvaRun r = run(g, params, 30000, 9);
    CHECK_FALSE(r.aborted);
    CHECK(!r.lengths.empty());
    REQUIRE(r.final_delays.size() == 25);
    for (double d : r.final_delays) {
        CHECK(d >= 0.0);
        CHECK(d <= params.threshold);
    }
}

TEST_CASE("avalanche_stats aggregates lengths") {
    AvaRun r;
    r.lengths = {1, 1, 2, 4};
    const auto stats = avalanche_stats(std::vector<AvaRun>{r});
    REQUIRE(stats.has_value());
    CHECK(stats->mean_length == doctest::Approx(2.0));
    CHECK(stats->avalanche_count == 4);
    CHECK(stats->histogram.at(1) == 2);
    CHECK(stats->histogram.at(4) == 1);
}

TEST_CASE("avalanche_stats handles the degenerate all-ones histogram") {
    AvaRun r;
    r.lengths = {1, 1, 1};
    const auto stats = avalanche_stats(std::vector<AvaRun>{r});
    REQUIRE(stats.has_value());
    CHECK(stats->mean_length == doctest::Approx(1.0));
    CHECK_FALSE(stats->tail_slope.has_value());  // no points above the mode
}

TEST_CASE("avalanche_stats is absent when nothing toppled") {
    AvaRun r;
    CHECK_FALSE(avalanche_stats(std::vector<AvaRun>{r}).has_value());
}

TEST_CASE("compare_drivers with zero amplification is an exact tie") {
    const AvaGraph g = random_graph(20, 50, 5);
    AvaParams params;
    params.amplification = 0.0;
    params.threshold = 4.0;
    const DriverComparison cmp = compare_drivers(g, params, 20000, 4, 99);
    CHECK(cmp.periodic_mean == doctest::Approx(1.0));
    CHECK(cmp.stochastic_mean == doctest::Approx(1.0));
}

TEST_CASE("compare_drivers is deterministic and thread-count independent") {
    const AvaGraph g = random_graph(30, 80, 6);
    AvaParams params;
    const DriverComparison a = compare_drivers(g, params, 10000, 6, 31, 1);
    const DriverComparison b = compare_drivers(g, params, 10000, 6, 31, 4);
    CHECK(a.per_seed == b.per_seed);
}
