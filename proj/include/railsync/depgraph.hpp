#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "railsync/timetable.hpp"

// Time-expanded dependency graph: distinct nodes per departure/arrival event
// plus schedule nodes carrying the planned times. Delay scenarios propagate
// along standing, traveling and transfer edges under a waiting policy;
// passenger delays come from following planned routes and rerouting via
// earliest-arrival queries when a connection breaks.

namespace railsync::depgraph {

enum class NodeKind { schedule, forecast, arrival, departure };
enum class EdgeKind { schedule, forecast, standing, traveling, transfer };

struct WaitingPolicy {
    // capped: a connecting train waits for a late feeder up to max_wait past
    // its planned departure, then leaves (timestamps are monotone in the
    // injections). conditional: the wait is skipped entirely when the feeder
    // cannot make it within max_wait (the train departs on time instead).
    enum class Rule { capped, conditional };
    Rule rule = Rule::capped;
    Minutes default_max_wait = 5;
    std::map<std::pair<TrainCategory, TrainCategory>, Minutes> pair_max_wait;

    Minutes max_wait_for(TrainCategory feeder, TrainCategory connecting) const;
};

struct BuildOptions {
    Minutes min_standing = 2;  // effective standing bound is min(this, planned dwell)
    double catch_up = 0.0;     // fraction of the departure delay recovered per segment
};

struct Node {
    NodeKind kind = NodeKind::schedule;
    int train = -1;
    int segment = -1;
    int station = -1;
    Minutes planned = 0;
};

struct Edge {
    EdgeKind kind = EdgeKind::schedule;
    int tail = -1;
    int head = -1;
    Minutes bound = 0;
};

struct TransferIn {
    int feeder_arr = 0;     // event node index of the feeder arrival
    Minutes min_transfer = 0;
    Minutes max_wait = 0;
};

struct Connection {
    int dep_node = 0;
    int arr_node = 0;
    int train = 0;
    int from_station = 0;
    int to_station = 0;
};

struct DepGraph {
    std::vector<std::string> train_ids;  // sorted ascending
    std::vector<TrainCategory> train_categories;
    std::vector<std::string> station_ids;  // sorted ascending
    std::vector<Minutes> station_min_transfer;

    std::vector<Node> nodes;  // event nodes first, schedule nodes after
    std::vector<Edge> edges;
    int event_node_count = 0;

    // Per event node, in node order.
    std::vector<Minutes> planned;
    std::vector<int> order_pos;   // position in the propagation order
    std::vector<int> order;       // inverse: order -> node

    // Incoming dependencies.
    std::vector<int> standing_pred;            // dep node -> same-train arrival (-1 if first)
    std::vector<Minutes> standing_bound;       // dep node -> effective standing time
    std::vector<int> traveling_pred;           // arr node -> departure node (-1 for dep nodes)
    std::vector<std::vector<TransferIn>> transfer_in;  // dep node -> feeders

    // Outgoing dependencies for sparse propagation: when a node's timestamp
    // rises it pushes a new lower bound to each successor.
    struct OutEdge {
        int head = 0;
        EdgeKind kind = EdgeKind::traveling;
        Minutes bound = 0;     // travel duration / standing time / min_transfer
        Minutes max_wait = 0;  // transfer edges only
    };
    std::vector<std::vector<OutEdge>> succ;

    std::vector<Connection> connections;       // planned-departure order
    std::vector<int> conn_of_dep;              // dep node -> connection index
    std::vector<std::vector<int>> train_segments;  // train -> segment-ordered dep nodes

    WaitingPolicy policy;
    BuildOptions options;

    int station_index(const std::string& id) const;
    int train_index(const std::string& id) const;
    // First event of the train at the station with the given kind, -1 if none.
    int find_event(const std::string& train, const std::string& station, NodeKind kind) const;
};

struct DelayInjection {
    int node = 0;       // event node index
    Minutes delay = 0;  // primary delay p >= 0
};

struct DelayScenario {
    std::vector<DelayInjection> injections;
};

class DepGraphError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

DepGraph build_depgraph(const Timetable& tt, const std::vector<TransferOpportunity>& transfers,
                        const WaitingPolicy& policy = {}, const BuildOptions& options = {});

// Scratch space reused across scenarios; one instance per worker thread.
struct Workspace {
    std::vector<Minutes> ts;
    std::vector<std::uint32_t> stamp;
    std::uint32_t epoch = 0;
    std::vector<int> changed;
    std::vector<Minutes> pending;  // accumulated lower bounds for queued nodes
    std::vector<std::uint32_t> queued_stamp;
    std::vector<int> conn_order;        // per-scenario connection order by actual dep
    bool conn_order_valid = false;
    std::vector<Minutes> reach;
    std::vector<std::uint8_t> onboard;

    void reset(const DepGraph& g);
    Minutes timestamp(const DepGraph& g, int node) const;
};

// Full timestamp vector for all event nodes, planned order preserved.
std::vector<Minutes> propagate(const DepGraph& g, const DelayScenario& scenario);

// Sparse form: applies the scenario into ws and records only raised nodes.
void propagate_into(const DepGraph& g, const DelayScenario& scenario, Workspace& ws);

struct Leg {
    std::string train;
    std::string board_station;
    Minutes board_time = 0;
    std::string alight_station;
    Minutes alight_time = 0;
};

struct Itinerary {
    std::vector<Leg> legs;
    Minutes arrival = 0;
};

// Earliest arrival over the propagated timetable, honoring each station's
// minimal interchange time; ties broken by fewer legs, then lexicographic
// train-id sequence. nullopt when the destination is unreachable.
std::optional<Itinerary> earliest_arrival(const DepGraph& g, std::span<const Minutes> ts,
                                          const std::string& origin,
                                          const std::string& destination, Minutes not_before,
                                          int max_legs = 8);

struct PassengerOutcome {
    Minutes delay = 0;
    bool rerouted = false;
    bool stranded = false;  // delay carries the configured sentinel
};

struct ResolvedLeg {
    int train = 0;
    int board_dep = 0;   // event node
    int alight_arr = 0;  // event node
    int alight_station = 0;
};

struct ResolvedRoute {
    int route_index = 0;
    int passengers = 1;
    Minutes planned_arrival = 0;
    int destination = 0;  // station index
    std::vector<ResolvedLeg> legs;
};

ResolvedRoute resolve_route(const DepGraph& g, const PassengerRoute& route, int route_index = 0);

PassengerOutcome passenger_delay(const DepGraph& g, const ResolvedRoute& route, Workspace& ws,
                                 Minutes max_delay = 720);
PassengerOutcome passenger_delay(const DepGraph& g, const PassengerRoute& route,
                                 const DelayScenario& scenario, Minutes max_delay = 720);

struct SweepParams {
    std::vector<Minutes> p_values = {5, 30};
    Minutes max_delay = 720;
    unsigned threads = 1;
};

struct SweepCell {
    std::string station;
    int rank = 0;
    Minutes p = 0;
    long long scenarios = 0;
    long long affected_passengers = 0;  // summed over scenarios
    double s_total = 0.0;               // passenger-minutes summed over scenarios
    long long stranded = 0;             // stranded passengers, kept out of s_total

    double s_mean() const { return affected_passengers > 0 ? s_total / affected_passengers : 0.0; }
    double s_per_scenario() const { return scenarios > 0 ? s_total / scenarios : 0.0; }
};

struct SweepResult {
    std::vector<SweepCell> cells;  // ordered by (station id, p)
};

// One scenario per arrival event and station: that arrival delayed by p.
SweepResult secondary_delay_sweep(const DepGraph& g, const Timetable& tt,
                                  const SweepParams& params);

void write_sweep_csv(const SweepResult& result, const std::string& path,
                     const std::string& config_comment = "");
SweepResult read_sweep_csv(const std::string& path);

std::string scenario_to_json(const DepGraph& g, const DelayScenario& sc);
DelayScenario scenario_from_json(const DepGraph& g, const std::string& text);

}  // namespace railsync::depgraph
