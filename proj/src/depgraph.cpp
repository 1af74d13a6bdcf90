#include "railsync/depgraph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <tuple>

#include <json.hpp>

#include "railsync/csv.hpp"
#include "railsync/parallel.hpp"

namespace railsync::depgraph {

namespace {
constexpr Minutes kInfinity = std::numeric_limits<Minutes>::max() / 4;
}

Minutes WaitingPolicy::max_wait_for(TrainCategory feeder, TrainCategory connecting) const {
    auto it = pair_max_wait.find({feeder, connecting});
    return it == pair_max_wait.end() ? default_max_wait : it->second;
}

int DepGraph::station_index(const std::string& id) const {
    auto it = std::lower_bound(station_ids.begin(), station_ids.end(), id);
    if (it == station_ids.end() || *it != id) return -1;
    return static_cast<int>(it - station_ids.begin());
}

int DepGraph::train_index(const std::string& id) const {
    auto it = std::lower_bound(train_ids.begin(), train_ids.end(), id);
    if (it == train_ids.end() || *it != id) return -1;
    return static_cast<int>(it - train_ids.begin());
}

int DepGraph::find_event(const std::string& train, const std::string& station,
                         NodeKind kind) const {
    const int t = train_index(train);
    const int s = station_index(station);
    if (t < 0 || s < 0) return -1;
    for (int dep : train_segments[t]) {
        if (kind == NodeKind::departure && nodes[dep].station == s) return dep;
        const int arr = dep + 1;  // arrival node follows its departure
        if (kind == NodeKind::arrival && nodes[arr].station == s) return arr;
    }
    return -1;
}

DepGraph build_depgraph(const Timetable& tt, const std::vector<TransferOpportunity>& transfers,
                        const WaitingPolicy& policy, const BuildOptions& options) {
    DepGraph g;
    g.policy = policy;
    g.options = options;

    for (const auto& [id, st] : tt.stations) g.station_ids.push_back(id);
    std::sort(g.station_ids.begin(), g.station_ids.end());
    g.station_min_transfer.resize(g.station_ids.size());
    for (std::size_t i = 0; i < g.station_ids.size(); ++i)
        g.station_min_transfer[i] = tt.stations.at(g.station_ids[i]).min_transfer;

    for (const auto& [id, run] : tt.runs) g.train_ids.push_back(id);
    std::sort(g.train_ids.begin(), g.train_ids.end());
    g.train_categories.resize(g.train_ids.size());
    for (std::size_t i = 0; i < g.train_ids.size(); ++i)
        g.train_categories[i] = tt.runs.at(g.train_ids[i]).category;

    // Event nodes: per segment a departure node immediately followed by its
    // arrival node; find_event and the connection table rely on that layout.
    g.train_segments.resize(g.train_ids.size());
    for (std::size_t t = 0; t < g.train_ids.size(); ++t) {
        const TrainRun& run = tt.runs.at(g.train_ids[t]);
        for (std::size_t s = 0; s < run.segments.size(); ++s) {
            const Segment& seg = run.segments[s];
            const int dep = static_cast<int>(g.nodes.size());
            g.nodes.push_back({NodeKind::departure, static_cast<int>(t), static_cast<int>(s),
                               g.station_index(seg.from_station), seg.dep_time});
            g.nodes.push_back({NodeKind::arrival, static_cast<int>(t), static_cast<int>(s),
                               g.station_index(seg.to_station), seg.arr_time});
            g.train_segments[t].push_back(dep);
        }
    }
    g.event_node_count = static_cast<int>(g.nodes.size());
    const int n_ev = g.event_node_count;

    g.planned.resize(n_ev);
    for (int v = 0; v < n_ev; ++v) g.planned[v] = g.nodes[v].planned;

    g.standing_pred.assign(n_ev, -1);
    g.standing_bound.assign(n_ev, 0);
    g.traveling_pred.assign(n_ev, -1);
    g.transfer_in.assign(n_ev, {});
    g.succ.assign(n_ev, {});

    for (std::size_t t = 0; t < g.train_segments.size(); ++t) {
        const auto& deps = g.train_segments[t];
        for (std::size_t s = 0; s < deps.size(); ++s) {
            const int dep = deps[s];
            const int arr = dep + 1;
            const Minutes duration = g.planned[arr] - g.planned[dep];
            g.traveling_pred[arr] = dep;
            g.succ[dep].push_back({arr, EdgeKind::traveling, duration, 0});
            g.edges.push_back({EdgeKind::traveling, dep, arr, duration});
            if (s > 0) {
                const int prev_arr = deps[s - 1] + 1;
                const Minutes dwell = g.planned[dep] - g.planned[prev_arr];
                g.standing_pred[dep] = prev_arr;
                g.standing_bound[dep] = std::min(options.min_standing, dwell);
                g.succ[prev_arr].push_back({dep, EdgeKind::standing, g.standing_bound[dep], 0});
                g.edges.push_back({EdgeKind::standing, prev_arr, dep, g.standing_bound[dep]});
            }
        }
    }

    for (const auto& tr : transfers) {
        const int ft = g.train_index(tr.from_train);
        const int ct = g.train_index(tr.to_train);
        if (ft < 0 || ct < 0)
            throw DepGraphError("transfer references unknown train '" +
                                (ft < 0 ? tr.from_train : tr.to_train) + "'");
        if (tr.from_segment < 0 || tr.from_segment >= static_cast<int>(g.train_segments[ft].size()) ||
            tr.to_segment < 0 || tr.to_segment >= static_cast<int>(g.train_segments[ct].size()))
            throw DepGraphError("transfer references segment out of range at '" + tr.station + "'");
        const int feeder_arr = g.train_segments[ft][tr.from_segment] + 1;
        const int conn_dep = g.train_segments[ct][tr.to_segment];
        const Minutes mt = g.station_min_transfer[g.nodes[feeder_arr].station];
        if (g.planned[conn_dep] - g.planned[feeder_arr] < mt)
            throw DepGraphError("transfer at '" + tr.station +
                                "' is below the minimal interchange time");
        const Minutes wait =
            policy.max_wait_for(g.train_categories[ft], g.train_categories[ct]);
        g.transfer_in[conn_dep].push_back({feeder_arr, mt, wait});
        g.succ[feeder_arr].push_back({conn_dep, EdgeKind::transfer, mt, wait});
        g.edges.push_back({EdgeKind::transfer, feeder_arr, conn_dep, mt});
    }

    // Propagation order: planned time, arrivals before departures, then train
    // and segment. Every dependency edge must point forward in this order.
    g.order.resize(n_ev);
    for (int v = 0; v < n_ev; ++v) g.order[v] = v;
    std::sort(g.order.begin(), g.order.end(), [&](int a, int b) {
        const Node& na = g.nodes[a];
        const Node& nb = g.nodes[b];
        const int ka = na.kind == NodeKind::arrival ? 0 : 1;
        const int kb = nb.kind == NodeKind::arrival ? 0 : 1;
        return std::tie(na.planned, ka, na.train, na.segment) <
               std::tie(nb.planned, kb, nb.train, nb.segment);
    });
    g.order_pos.resize(n_ev);
    for (int i = 0; i < n_ev; ++i) g.order_pos[g.order[i]] = i;
    for (const Edge& e : g.edges) {
        if (e.kind == EdgeKind::schedule || e.kind == EdgeKind::forecast) continue;
        if (g.order_pos[e.tail] >= g.order_pos[e.head])
            throw DepGraphError("dependency edge does not point forward in planned time (" +
                                g.train_ids[g.nodes[e.tail].train] + " -> " +
                                g.train_ids[g.nodes[e.head].train] + ")");
    }

    // Schedule nodes carry the planned time of their event.
    for (int v = 0; v < n_ev; ++v) {
        const Node& ev = g.nodes[v];
        const int sched = static_cast<int>(g.nodes.size());
        g.nodes.push_back({NodeKind::schedule, ev.train, ev.segment, ev.station, ev.planned});
        g.edges.push_back({EdgeKind::schedule, sched, v, ev.planned});
    }

    g.connections.reserve(n_ev / 2);
    for (std::size_t t = 0; t < g.train_segments.size(); ++t)
        for (int dep : g.train_segments[t])
            g.connections.push_back({dep, dep + 1, static_cast<int>(t), g.nodes[dep].station,
                                     g.nodes[dep + 1].station});
    std::sort(g.connections.begin(), g.connections.end(),
              [&](const Connection& a, const Connection& b) {
                  return std::tie(g.planned[a.dep_node], a.train, g.nodes[a.dep_node].segment) <
                         std::tie(g.planned[b.dep_node], b.train, g.nodes[b.dep_node].segment);
              });
    g.conn_of_dep.assign(n_ev, -1);
    for (std::size_t ci = 0; ci < g.connections.size(); ++ci)
        g.conn_of_dep[g.connections[ci].dep_node] = static_cast<int>(ci);
    return g;
}

void Workspace::reset(const DepGraph& g) {
    const std::size_t n = static_cast<std::size_t>(g.event_node_count);
    if (ts.size() != n) {
        ts.assign(n, 0);
        stamp.assign(n, 0);
        pending.assign(n, 0);
        queued_stamp.assign(n, 0);
        epoch = 0;
    }
    const std::size_t ns = g.station_ids.size();
    const std::size_t nt = g.train_ids.size();
    if (reach.size() != ns) reach.assign(ns, 0);
    if (onboard.size() != nt) onboard.assign(nt, 0);
    if (epoch == std::numeric_limits<std::uint32_t>::max()) {
        std::fill(stamp.begin(), stamp.end(), 0);
        std::fill(queued_stamp.begin(), queued_stamp.end(), 0);
        epoch = 0;
    }
    ++epoch;
    changed.clear();
    conn_order.clear();
    conn_order_valid = false;
}

Minutes Workspace::timestamp(const DepGraph& g, int node) const {
    return stamp[node] == epoch ? ts[node] : g.planned[node];
}

void propagate_into(const DepGraph& g, const DelayScenario& scenario, Workspace& ws) {
    ws.reset(g);

    // Raised nodes push new lower bounds along their out-edges; a node's final
    // timestamp is the maximum of its planned time and everything pushed into
    // it. Unchanged predecessors never contribute above the planned time, so
    // only the touched subgraph is visited.
    auto cmp = [&](int a, int b) { return g.order_pos[a] > g.order_pos[b]; };
    std::priority_queue<int, std::vector<int>, decltype(cmp)> queue(cmp);
    const auto push_bound = [&](int v, Minutes bound) {
        if (bound <= g.planned[v]) return;
        if (ws.queued_stamp[v] != ws.epoch) {
            ws.queued_stamp[v] = ws.epoch;
            ws.pending[v] = bound;
            queue.push(v);
        } else if (bound > ws.pending[v]) {
            ws.pending[v] = bound;
        }
    };

    for (const DelayInjection& inj : scenario.injections) {
        if (inj.node < 0 || inj.node >= g.event_node_count) {
            if (inj.node >= 0 && inj.node < static_cast<int>(g.nodes.size()))
                throw DepGraphError("injection on a schedule node; only event nodes accept delays");
            throw DepGraphError("injection on unknown node " + std::to_string(inj.node));
        }
        if (inj.delay < 0) throw DepGraphError("negative primary delay");
        push_bound(inj.node, g.planned[inj.node] + inj.delay);
    }

    while (!queue.empty()) {
        const int v = queue.top();
        queue.pop();
        const Minutes t = ws.pending[v];  // all raising predecessors precede v
        if (t <= ws.timestamp(g, v)) continue;
        if (ws.stamp[v] != ws.epoch) {
            ws.stamp[v] = ws.epoch;
            ws.changed.push_back(v);
        }
        ws.ts[v] = t;
        for (const DepGraph::OutEdge& e : g.succ[v]) {
            switch (e.kind) {
                case EdgeKind::traveling: {
                    Minutes arrival = t + e.bound;
                    if (g.options.catch_up > 0) {
                        const Minutes recoverable = static_cast<Minutes>(std::floor(
                            g.options.catch_up * static_cast<double>(t - g.planned[v])));
                        arrival = std::max(g.planned[e.head], arrival - recoverable);
                    }
                    push_bound(e.head, arrival);
                    break;
                }
                case EdgeKind::standing:
                    push_bound(e.head, t + e.bound);
                    break;
                case EdgeKind::transfer: {
                    const Minutes candidate = t + e.bound;
                    if (g.policy.rule == WaitingPolicy::Rule::capped)
                        push_bound(e.head, std::min(candidate, g.planned[e.head] + e.max_wait));
                    else if (candidate <= g.planned[e.head] + e.max_wait)
                        push_bound(e.head, candidate);
                    break;
                }
                default:
                    break;
            }
        }
    }
}

std::vector<Minutes> propagate(const DepGraph& g, const DelayScenario& scenario) {
    Workspace ws;
    propagate_into(g, scenario, ws);
    std::vector<Minutes> out(g.planned.begin(), g.planned.end());
    for (int v : ws.changed) out[v] = ws.ts[v];
    return out;
}

namespace {

// Connection-scan over the propagated timetable; returns the earliest raw
// arrival at dest, or kInfinity. Boarding at a station needs the label there
// (arrival + min_transfer for intermediate alights, not_before at the origin).
Minutes earliest_arrival_time(const DepGraph& g, Workspace& ws, int origin, int dest,
                              Minutes not_before) {
    if (!ws.conn_order_valid) {
        ws.conn_order.clear();
        std::vector<int> displaced;
        for (int v : ws.changed) {
            const Node& node = g.nodes[v];
            if (node.kind == NodeKind::departure) displaced.push_back(v);
        }
        if (!displaced.empty()) {
            std::vector<int> moved;
            for (int v : displaced)
                if (g.conn_of_dep[v] >= 0) moved.push_back(g.conn_of_dep[v]);
            const auto key = [&](int ci) {
                const Connection& c = g.connections[ci];
                return std::make_tuple(ws.timestamp(g, c.dep_node), c.train,
                                       g.nodes[c.dep_node].segment);
            };
            std::sort(moved.begin(), moved.end(), [&](int a, int b) { return key(a) < key(b); });
            std::vector<std::uint8_t> is_moved(g.connections.size(), 0);
            for (int ci : moved) is_moved[ci] = 1;
            ws.conn_order.reserve(g.connections.size());
            std::size_t mi = 0;
            for (std::size_t ci = 0; ci < g.connections.size(); ++ci) {
                if (is_moved[ci]) continue;
                while (mi < moved.size() && key(moved[mi]) < key(static_cast<int>(ci)))
                    ws.conn_order.push_back(moved[mi++]);
                ws.conn_order.push_back(static_cast<int>(ci));
            }
            while (mi < moved.size()) ws.conn_order.push_back(moved[mi++]);
        }
        ws.conn_order_valid = true;
    }

    std::fill(ws.reach.begin(), ws.reach.end(), kInfinity);
    std::fill(ws.onboard.begin(), ws.onboard.end(), 0);
    ws.reach[origin] = not_before;
    Minutes best = kInfinity;

    // connections are processed in actual-departure order, so the scan can
    // start at the first departure >= not_before and stop once nothing can
    // beat the best arrival
    const std::size_t n = g.connections.size();
    std::size_t start;
    if (ws.conn_order.empty()) {
        start = std::lower_bound(g.connections.begin(), g.connections.end(), not_before,
                                 [&](const Connection& c, Minutes t) {
                                     return g.planned[c.dep_node] < t;
                                 }) -
                g.connections.begin();
    } else {
        start = std::lower_bound(ws.conn_order.begin(), ws.conn_order.end(), not_before,
                                 [&](int ci, Minutes t) {
                                     return ws.timestamp(g, g.connections[ci].dep_node) < t;
                                 }) -
                ws.conn_order.begin();
    }
    for (std::size_t i = start; i < n; ++i) {
        const Connection& c =
            g.connections[ws.conn_order.empty() ? i : static_cast<std::size_t>(ws.conn_order[i])];
        const Minutes dep_ts = ws.timestamp(g, c.dep_node);
        if (dep_ts >= best) break;
        if (ws.onboard[c.train] || dep_ts >= ws.reach[c.from_station]) {
            ws.onboard[c.train] = 1;
            const Minutes arr_ts = ws.timestamp(g, c.arr_node);
            const Minutes labelled = arr_ts + g.station_min_transfer[c.to_station];
            if (labelled < ws.reach[c.to_station]) ws.reach[c.to_station] = labelled;
            if (c.to_station == dest && arr_ts < best) best = arr_ts;
        }
    }
    return best;
}

}  // namespace

ResolvedRoute resolve_route(const DepGraph& g, const PassengerRoute& route, int route_index) {
    ResolvedRoute out;
    out.route_index = route_index;
    out.passengers = route.passenger_count;
    out.planned_arrival = route.planned_arrival;
    for (const RouteLeg& leg : route.legs) {
        const int t = g.train_index(leg.train_id);
        if (t < 0) throw DepGraphError("route '" + route.id + "': unknown train " + leg.train_id);
        const int board_station = g.station_index(leg.board_station);
        const int alight_station = g.station_index(leg.alight_station);
        ResolvedLeg r;
        r.train = t;
        r.board_dep = -1;
        r.alight_arr = -1;
        for (int dep : g.train_segments[t]) {
            if (r.board_dep < 0 && g.nodes[dep].station == board_station) r.board_dep = dep;
            if (r.board_dep >= 0 && g.nodes[dep + 1].station == alight_station) {
                r.alight_arr = dep + 1;
                break;
            }
        }
        if (r.board_dep < 0 || r.alight_arr < 0)
            throw DepGraphError("route '" + route.id + "': leg does not match train path");
        r.alight_station = alight_station;
        out.legs.push_back(r);
    }
    out.destination = out.legs.back().alight_station;
    return out;
}

PassengerOutcome passenger_delay(const DepGraph& g, const ResolvedRoute& route, Workspace& ws,
                                 Minutes max_delay) {
    PassengerOutcome outcome;
    Minutes arr_ts = ws.timestamp(g, route.legs[0].alight_arr);
    int at_station = route.legs[0].alight_station;
    for (std::size_t li = 1; li < route.legs.size(); ++li) {
        const ResolvedLeg& leg = route.legs[li];
        const Minutes dep_ts = ws.timestamp(g, leg.board_dep);
        const Minutes mt = g.station_min_transfer[at_station];
        if (arr_ts + mt <= dep_ts) {
            arr_ts = ws.timestamp(g, leg.alight_arr);
            at_station = leg.alight_station;
            continue;
        }
        // broken connection: reroute from here towards the destination
        outcome.rerouted = true;
        const Minutes rerouted =
            earliest_arrival_time(g, ws, at_station, route.destination, arr_ts + mt);
        if (rerouted >= kInfinity) {
            outcome.stranded = true;
            outcome.delay = max_delay;
            return outcome;
        }
        outcome.delay = std::max(0, rerouted - route.planned_arrival);
        return outcome;
    }
    outcome.delay = std::max(0, arr_ts - route.planned_arrival);
    return outcome;
}

PassengerOutcome passenger_delay(const DepGraph& g, const PassengerRoute& route,
                                 const DelayScenario& scenario, Minutes max_delay) {
    Workspace ws;
    propagate_into(g, scenario, ws);
    return passenger_delay(g, resolve_route(g, route), ws, max_delay);
}

std::optional<Itinerary> earliest_arrival(const DepGraph& g, std::span<const Minutes> ts,
                                          const std::string& origin,
                                          const std::string& destination, Minutes not_before,
                                          int max_legs) {
    const int o = g.station_index(origin);
    const int d = g.station_index(destination);
    if (o < 0) throw DepGraphError("unknown origin station '" + origin + "'");
    if (d < 0) throw DepGraphError("unknown destination station '" + destination + "'");
    if (o == d) throw DepGraphError("origin equals destination");

    // station -> connections departing there
    std::vector<std::vector<int>> by_station(g.station_ids.size());
    for (std::size_t ci = 0; ci < g.connections.size(); ++ci)
        by_station[g.connections[ci].from_station].push_back(static_cast<int>(ci));

    struct Label {
        Minutes time;
        int legs;
        std::vector<int> trains;
        int station;
        std::vector<Leg> path;
    };
    const auto tuple_less = [](const Label& a, const Label& b) {
        return std::tie(a.time, a.legs, a.trains) < std::tie(b.time, b.legs, b.trains);
    };
    const auto queue_greater = [&](const Label& a, const Label& b) { return tuple_less(b, a); };
    std::priority_queue<Label, std::vector<Label>, decltype(queue_greater)> queue(queue_greater);
    std::vector<std::vector<std::pair<Minutes, int>>> pareto(g.station_ids.size());

    const auto dominated = [&](int station, Minutes time, int legs) {
        for (const auto& [t, l] : pareto[station])
            if (t <= time && l <= legs) return true;
        return false;
    };
    const auto insert = [&](int station, Minutes time, int legs) {
        auto& set = pareto[station];
        set.erase(std::remove_if(set.begin(), set.end(),
                                 [&](const auto& e) { return time <= e.first && legs <= e.second; }),
                  set.end());
        set.emplace_back(time, legs);
    };

    std::optional<Label> best;
    queue.push({not_before, 0, {}, o, {}});
    insert(o, not_before, 0);

    while (!queue.empty()) {
        Label cur = queue.top();
        queue.pop();
        if (best && cur.time >= best->time) break;
        if (cur.legs >= max_legs) continue;
        for (int ci : by_station[cur.station]) {
            const Connection& c = g.connections[ci];
            const Minutes dep_ts = ts[c.dep_node];
            if (dep_ts < cur.time) continue;
            if (!cur.trains.empty() && c.train == cur.trains.back()) continue;
            // ride this train through every downstream stop
            const auto& deps = g.train_segments[c.train];
            bool started = false;
            for (int dep : deps) {
                if (dep == c.dep_node) started = true;
                if (!started) continue;
                const int arr = dep + 1;
                const int arr_station = g.nodes[arr].station;
                const Minutes arr_ts = ts[arr];
                Label next;
                next.legs = cur.legs + 1;
                next.trains = cur.trains;
                next.trains.push_back(c.train);
                next.path = cur.path;
                next.path.push_back({g.train_ids[c.train], g.station_ids[cur.station], dep_ts,
                                     g.station_ids[arr_station], arr_ts});
                if (arr_station == d) {
                    next.time = arr_ts;
                    next.station = d;
                    if (!best || tuple_less(next, *best)) best = next;
                    continue;
                }
                next.time = arr_ts + g.station_min_transfer[arr_station];
                next.station = arr_station;
                if (best && next.time >= best->time) continue;
                if (dominated(arr_station, next.time, next.legs)) continue;
                insert(arr_station, next.time, next.legs);
                queue.push(std::move(next));
            }
        }
    }

    if (!best) return std::nullopt;
    Itinerary it;
    it.legs = best->path;
    it.arrival = best->time;
    return it;
}

SweepResult secondary_delay_sweep(const DepGraph& g, const Timetable& tt,
                                  const SweepParams& params) {
    if (tt.routes.empty()) throw DepGraphError("secondary_delay_sweep: no passenger routes");
    for (Minutes p : params.p_values)
        if (p < 0) throw DepGraphError("secondary_delay_sweep: negative primary delay");

    std::vector<ResolvedRoute> routes;
    routes.reserve(tt.routes.size());
    for (std::size_t i = 0; i < tt.routes.size(); ++i)
        routes.push_back(resolve_route(g, tt.routes[i], static_cast<int>(i)));

    // event node -> routes whose outcome can depend on it
    std::vector<std::vector<int>> routes_of_node(g.event_node_count);
    for (std::size_t ri = 0; ri < routes.size(); ++ri) {
        for (const ResolvedLeg& leg : routes[ri].legs) {
            routes_of_node[leg.board_dep].push_back(static_cast<int>(ri));
            routes_of_node[leg.alight_arr].push_back(static_cast<int>(ri));
        }
    }

    // ranks over all stations with events
    std::map<std::string, int> sizes;
    for (int v = 0; v < g.event_node_count; ++v)
        ++sizes[g.station_ids[g.nodes[v].station]];
    const auto ranked = station_rank(sizes);
    std::map<std::string, int> rank_of;
    for (std::size_t i = 0; i < ranked.size(); ++i) rank_of[ranked[i]] = static_cast<int>(i) + 1;

    // one job per (arrival event, p)
    std::vector<std::vector<int>> arrivals_by_station(g.station_ids.size());
    for (int v = 0; v < g.event_node_count; ++v)
        if (g.nodes[v].kind == NodeKind::arrival) arrivals_by_station[g.nodes[v].station].push_back(v);

    struct Job {
        int station;
        int arrival_node;
        std::size_t p_index;
    };
    std::vector<Job> jobs;
    for (std::size_t s = 0; s < arrivals_by_station.size(); ++s)
        for (int v : arrivals_by_station[s])
            for (std::size_t pi = 0; pi < params.p_values.size(); ++pi)
                jobs.push_back({static_cast<int>(s), v, pi});

    struct JobResult {
        double total = 0;
        long long affected = 0;
        long long stranded = 0;
    };
    std::vector<JobResult> results(jobs.size());

    const unsigned threads = std::max(1u, params.threads);
    std::vector<Workspace> workspaces(threads);
    std::vector<std::vector<std::uint32_t>> route_mark(threads);
    std::vector<std::uint32_t> route_epoch(threads, 0);
    for (auto& m : route_mark) m.assign(routes.size(), 0);

    parallel_for_workers(jobs.size(), threads, [&](unsigned worker, std::size_t ji) {
        const Job& job = jobs[ji];
        Workspace& ws = workspaces[worker];
        DelayScenario sc;
        sc.injections.push_back({job.arrival_node, params.p_values[job.p_index]});
        propagate_into(g, sc, ws);
        if (ws.changed.empty()) return;

        auto& mark = route_mark[worker];
        const std::uint32_t epoch = ++route_epoch[worker];
        JobResult& res = results[ji];
        for (int v : ws.changed) {
            for (int ri : routes_of_node[v]) {
                if (mark[ri] == epoch) continue;
                mark[ri] = epoch;
                const ResolvedRoute& route = routes[ri];
                const PassengerOutcome outcome =
                    passenger_delay(g, route, ws, params.max_delay);
                if (outcome.stranded) {
                    res.stranded += route.passengers;
                } else if (outcome.delay > 0) {
                    res.affected += route.passengers;
                    res.total += static_cast<double>(outcome.delay) * route.passengers;
                }
            }
        }
    });

    SweepResult sweep;
    for (std::size_t s = 0; s < arrivals_by_station.size(); ++s) {
        if (arrivals_by_station[s].empty()) continue;
        for (std::size_t pi = 0; pi < params.p_values.size(); ++pi) {
            SweepCell cell;
            cell.station = g.station_ids[s];
            cell.rank = rank_of.at(cell.station);
            cell.p = params.p_values[pi];
            cell.scenarios = static_cast<long long>(arrivals_by_station[s].size());
            sweep.cells.push_back(cell);
        }
    }
    std::map<std::pair<std::string, Minutes>, std::size_t> cell_of;
    for (std::size_t i = 0; i < sweep.cells.size(); ++i)
        cell_of[{sweep.cells[i].station, sweep.cells[i].p}] = i;
    for (std::size_t ji = 0; ji < jobs.size(); ++ji) {
        const Job& job = jobs[ji];
        SweepCell& cell = sweep.cells[cell_of.at(
            {g.station_ids[job.station], params.p_values[job.p_index]})];
        cell.affected_passengers += results[ji].affected;
        cell.s_total += results[ji].total;
        cell.stranded += results[ji].stranded;
    }
    return sweep;
}

void write_sweep_csv(const SweepResult& result, const std::string& path,
                     const std::string& config_comment) {
    std::ofstream out(path);
    if (!out) throw DepGraphError("cannot write " + path);
    if (!config_comment.empty()) out << "# " << config_comment << "\n";
    out << "station_id,rank,p,affected_passengers,s_mean,s_total,stranded,scenarios,s_per_scenario\n";
    for (const SweepCell& c : result.cells)
        out << csv_escape(c.station) << ',' << c.rank << ',' << c.p << ',' << c.affected_passengers
            << ',' << format_double(c.s_mean()) << ',' << format_double(c.s_total) << ','
            << c.stranded << ',' << c.scenarios << ',' << format_double(c.s_per_scenario()) << '\n';
}

SweepResult read_sweep_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    const int c_station = t.column("station_id");
    const int c_rank = t.column("rank");
    const int c_p = t.column("p");
    const int c_aff = t.column("affected_passengers");
    const int c_total = t.column("s_total");
    const int c_stranded = t.column("stranded");
    const int c_scen = t.column("scenarios");
    SweepResult result;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        SweepCell cell;
        cell.station = t.rows[r][c_station];
        cell.rank = parse_int_field(t, r, c_rank);
        cell.p = parse_int_field(t, r, c_p);
        cell.affected_passengers = parse_int_field(t, r, c_aff);
        cell.s_total = parse_double_field(t, r, c_total);
        cell.stranded = parse_int_field(t, r, c_stranded);
        cell.scenarios = parse_int_field(t, r, c_scen);
        result.cells.push_back(std::move(cell));
    }
    return result;
}

std::string scenario_to_json(const DepGraph& g, const DelayScenario& sc) {
    nlohmann::json j = nlohmann::json::array();
    for (const DelayInjection& inj : sc.injections) {
        const Node& node = g.nodes[inj.node];
        j.push_back({{"train", g.train_ids[node.train]},
                     {"station", g.station_ids[node.station]},
                     {"kind", node.kind == NodeKind::arrival ? "arrival" : "departure"},
                     {"delay_min", inj.delay}});
    }
    return j.dump(2);
}

DelayScenario scenario_from_json(const DepGraph& g, const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    DelayScenario sc;
    for (const auto& e : j) {
        const std::string kind = e.at("kind").get<std::string>();
        NodeKind k;
        if (kind == "arrival") k = NodeKind::arrival;
        else if (kind == "departure") k = NodeKind::departure;
        else
            throw DepGraphError("injection on a " + kind +
                                " node; only arrival/departure events accept delays");
        const int node = g.find_event(e.at("train").get<std::string>(),
                                      e.at("station").get<std::string>(), k);
        if (node < 0) throw DepGraphError("scenario references unknown event");
        sc.injections.push_back({node, e.at("delay_min").get<Minutes>()});
    }
    return sc;
}

}  // namespace railsync::depgraph
