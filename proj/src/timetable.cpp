#include "railsync/timetable.hpp"

#include <algorithm>
#include <tuple>

namespace railsync {

const char* to_string(TrainCategory c) {
    switch (c) {
        case TrainCategory::long_distance_fast: return "long_distance_fast";
        case TrainCategory::long_distance: return "long_distance";
        case TrainCategory::other: return "other";
    }
    return "other";
}

std::optional<TrainCategory> category_from_string(const std::string& s) {
    if (s == "long_distance_fast") return TrainCategory::long_distance_fast;
    if (s == "long_distance") return TrainCategory::long_distance;
    if (s == "other") return TrainCategory::other;
    return std::nullopt;
}

namespace {

// First departure of the train at the station; -1 if the train never leaves it.
int board_segment(const TrainRun& run, const std::string& station) {
    for (std::size_t i = 0; i < run.segments.size(); ++i)
        if (run.segments[i].from_station == station) return static_cast<int>(i);
    return -1;
}

int alight_segment(const TrainRun& run, const std::string& station, int after) {
    for (std::size_t i = static_cast<std::size_t>(after); i < run.segments.size(); ++i)
        if (run.segments[i].to_station == station) return static_cast<int>(i);
    return -1;
}

}  // namespace

void validate(const Timetable& tt, Minutes transfer_window) {
    for (const auto& [id, st] : tt.stations) {
        if (id != st.id) throw TimetableError("station map key mismatch for '" + id + "'");
        if (st.min_transfer < 0)
            throw TimetableError("station '" + id + "': negative min_transfer");
    }
    for (const auto& [id, run] : tt.runs) {
        if (id != run.id) throw TimetableError("train map key mismatch for '" + id + "'");
        if (run.segments.empty()) throw TimetableError("train '" + id + "' has no segments");
        for (std::size_t i = 0; i < run.segments.size(); ++i) {
            const Segment& s = run.segments[i];
            if (!tt.stations.count(s.from_station))
                throw TimetableError("train '" + id + "' segment " + std::to_string(i) +
                                     ": unknown station '" + s.from_station + "'");
            if (!tt.stations.count(s.to_station))
                throw TimetableError("train '" + id + "' segment " + std::to_string(i) +
                                     ": unknown station '" + s.to_station + "'");
            if (s.dep_time < 0 || s.arr_time < 0)
                throw TimetableError("train '" + id + "' segment " + std::to_string(i) +
                                     ": negative time");
            if (s.arr_time <= s.dep_time)
                throw TimetableError("train '" + id + "' segment " + std::to_string(i) +
                                     ": arrival " + std::to_string(s.arr_time) +
                                     " not after departure " + std::to_string(s.dep_time));
            if (i > 0) {
                const Segment& prev = run.segments[i - 1];
                if (prev.to_station != s.from_station)
                    throw TimetableError("train '" + id + "' segment " + std::to_string(i) +
                                         ": does not continue from '" + prev.to_station + "'");
                if (s.dep_time < prev.arr_time)
                    throw TimetableError("train '" + id + "' segment " + std::to_string(i) +
                                         ": departs before previous arrival");
            }
        }
    }
    for (const auto& route : tt.routes) {
        if (route.passenger_count <= 0)
            throw TimetableError("route '" + route.id + "': passenger count must be positive");
        if (route.legs.empty()) throw TimetableError("route '" + route.id + "' has no legs");
        Minutes prev_arr = 0;
        const Segment* last = nullptr;
        for (std::size_t li = 0; li < route.legs.size(); ++li) {
            const RouteLeg& leg = route.legs[li];
            auto it = tt.runs.find(leg.train_id);
            if (it == tt.runs.end())
                throw TimetableError("route '" + route.id + "': unknown train '" + leg.train_id +
                                     "'");
            const TrainRun& run = it->second;
            int b = board_segment(run, leg.board_station);
            if (b < 0)
                throw TimetableError("route '" + route.id + "': train '" + leg.train_id +
                                     "' does not depart from '" + leg.board_station + "'");
            int a = alight_segment(run, leg.alight_station, b);
            if (a < 0)
                throw TimetableError("route '" + route.id + "': train '" + leg.train_id +
                                     "' does not reach '" + leg.alight_station + "' after '" +
                                     leg.board_station + "'");
            if (li > 0) {
                if (route.legs[li - 1].alight_station != leg.board_station)
                    throw TimetableError("route '" + route.id + "': leg " + std::to_string(li) +
                                         " does not start where the previous one ended");
                const Minutes buffer = run.segments[b].dep_time - prev_arr;
                const Minutes mt = tt.stations.at(leg.board_station).min_transfer;
                if (buffer < mt || buffer > transfer_window)
                    throw TimetableError("route '" + route.id + "': transfer at '" +
                                         leg.board_station + "' has buffer " +
                                         std::to_string(buffer) + " outside [" +
                                         std::to_string(mt) + ", " +
                                         std::to_string(transfer_window) + "]");
            }
            prev_arr = run.segments[a].arr_time;
            last = &run.segments[a];
        }
        if (last && route.planned_arrival != last->arr_time)
            throw TimetableError("route '" + route.id + "': planned arrival " +
                                 std::to_string(route.planned_arrival) +
                                 " does not match the last leg's arrival " +
                                 std::to_string(last->arr_time));
    }
}

std::map<std::string, EventList> station_events(const Timetable& tt) {
    std::map<std::string, EventList> out;
    for (const auto& [id, st] : tt.stations) {
        out[id].station = id;
    }
    for (const auto& [id, run] : tt.runs) {
        for (std::size_t i = 0; i < run.segments.size(); ++i) {
            const Segment& s = run.segments[i];
            out[s.from_station].events.push_back(
                {s.dep_time, EventKind::departure, id, static_cast<int>(i)});
            out[s.to_station].events.push_back(
                {s.arr_time, EventKind::arrival, id, static_cast<int>(i)});
        }
    }
    for (auto& [id, list] : out) {
        std::sort(list.events.begin(), list.events.end(), [](const Event& a, const Event& b) {
            return std::tie(a.time, a.kind, a.train_id, a.segment_index) <
                   std::tie(b.time, b.kind, b.train_id, b.segment_index);
        });
    }
    return out;
}

std::vector<std::string> station_rank(const std::map<std::string, int>& sizes) {
    std::vector<std::pair<std::string, int>> v(sizes.begin(), sizes.end());
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<std::string> out;
    out.reserve(v.size());
    for (auto& [id, _] : v) out.push_back(id);
    return out;
}

std::vector<TransferOpportunity> derive_transfers(const Timetable& tt, Minutes max_window) {
    std::vector<TransferOpportunity> out;
    const auto events = station_events(tt);
    for (const auto& [station, list] : events) {
        const Minutes mt = tt.stations.at(station).min_transfer;
        std::vector<const Event*> deps;
        for (const Event& e : list.events)
            if (e.kind == EventKind::departure) deps.push_back(&e);
        // deps inherit the time order; window lookups by binary search
        for (const Event& arr : list.events) {
            if (arr.kind != EventKind::arrival) continue;
            auto lo = std::lower_bound(deps.begin(), deps.end(), arr.time + mt,
                                       [](const Event* e, Minutes t) { return e->time < t; });
            for (auto it = lo; it != deps.end() && (*it)->time <= arr.time + max_window; ++it) {
                const Event& dep = **it;
                if (dep.train_id == arr.train_id) continue;
                out.push_back({station, arr.train_id, arr.segment_index, dep.train_id,
                               dep.segment_index, arr.time, dep.time, dep.time - arr.time});
            }
        }
    }
    return out;
}

std::map<std::string, double> buffering_times(const std::vector<TransferOpportunity>& transfers) {
    std::map<std::string, std::pair<double, long long>> acc;
    for (const auto& t : transfers) {
        auto& [sum, count] = acc[t.station];
        sum += t.buffer;
        ++count;
    }
    std::map<std::string, double> out;
    for (const auto& [station, sc] : acc) out[station] = sc.first / static_cast<double>(sc.second);
    return out;
}

std::map<std::string, double> buffering_slack(const Timetable& tt,
                                              const std::vector<TransferOpportunity>& transfers) {
    std::map<std::string, std::pair<double, long long>> acc;
    for (const auto& t : transfers) {
        auto& [sum, count] = acc[t.station];
        sum += t.buffer - tt.stations.at(t.station).min_transfer;
        ++count;
    }
    std::map<std::string, double> out;
    for (const auto& [station, sc] : acc) out[station] = sc.first / static_cast<double>(sc.second);
    return out;
}

std::map<std::string, double> buffering_times_realized(const Timetable& tt,
                                                       Minutes transfer_window) {
    (void)transfer_window;
    std::map<std::string, std::pair<double, long long>> acc;
    for (const auto& route : tt.routes) {
        Minutes prev_arr = 0;
        for (std::size_t li = 0; li < route.legs.size(); ++li) {
            const RouteLeg& leg = route.legs[li];
            const TrainRun& run = tt.runs.at(leg.train_id);
            const int b = board_segment(run, leg.board_station);
            if (li > 0) {
                auto& [sum, count] = acc[leg.board_station];
                sum += (run.segments[b].dep_time - prev_arr) * route.passenger_count;
                count += route.passenger_count;
            }
            const int a = alight_segment(run, leg.alight_station, b);
            prev_arr = run.segments[a].arr_time;
        }
    }
    std::map<std::string, double> out;
    for (const auto& [station, sc] : acc) out[station] = sc.first / static_cast<double>(sc.second);
    return out;
}

}  // namespace railsync
