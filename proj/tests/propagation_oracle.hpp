#pragma once

#include <algorithm>
#include <vector>

#include "railsync/depgraph.hpp"

// Brute-force reference for propagate(): sweep all event nodes with the local
// timestamp rules until nothing changes. Independent of the ordered
// single-pass engine; quadratic and only meant for small fixtures.

namespace testoracle {

inline std::vector<railsync::Minutes> fixed_point(const railsync::depgraph::DepGraph& g,
                                                  const railsync::depgraph::DelayScenario& sc) {
    using namespace railsync;
    using namespace railsync::depgraph;

    const int n = g.event_node_count;
    std::vector<Minutes> lower(n, 0);
    for (int v = 0; v < n; ++v) lower[v] = g.planned[v];
    for (const DelayInjection& inj : sc.injections)
        lower[inj.node] = std::max(lower[inj.node], g.planned[inj.node] + inj.delay);

    std::vector<Minutes> ts = lower;
    bool dirty = true;
    int sweeps = 0;
    while (dirty) {
        if (++sweeps > n + 2) throw std::runtime_error("oracle failed to converge");
        dirty = false;
        for (int v = 0; v < n; ++v) {
            Minutes t = lower[v];
            if (g.nodes[v].kind == NodeKind::departure) {
                if (g.standing_pred[v] >= 0)
                    t = std::max(t, ts[g.standing_pred[v]] + g.standing_bound[v]);
                for (const TransferIn& in : g.transfer_in[v]) {
                    const Minutes candidate = ts[in.feeder_arr] + in.min_transfer;
                    if (g.policy.rule == WaitingPolicy::Rule::capped)
                        t = std::max(t, std::min(candidate, g.planned[v] + in.max_wait));
                    else if (candidate <= g.planned[v] + in.max_wait)
                        t = std::max(t, candidate);
                }
            } else {
                const int dep = g.traveling_pred[v];
                t = std::max(t, ts[dep] + (g.planned[v] - g.planned[dep]));
            }
            if (t != ts[v]) {
                ts[v] = t;
                dirty = true;
            }
        }
    }
    return ts;
}

}  // namespace testoracle
