#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

// Core timetable model: stations, train runs, passenger routes and the
// observables derived from them (event lists, ranks, transfers, buffering).
// All times are integer minutes since the start of the service day; values
// beyond day_length denote next-day events.

namespace railsync {

using Minutes = int;

enum class TrainCategory { long_distance_fast, long_distance, other };

const char* to_string(TrainCategory c);
std::optional<TrainCategory> category_from_string(const std::string& s);

struct Station {
    std::string id;
    std::string name;
    Minutes min_transfer = 0;  // station-specific minimal interchange time
};

struct Segment {
    std::string from_station;
    Minutes dep_time = 0;
    std::string to_station;
    Minutes arr_time = 0;

    bool operator==(const Segment&) const = default;
};

struct TrainRun {
    std::string id;
    TrainCategory category = TrainCategory::other;
    std::vector<Segment> segments;
};

struct RouteLeg {
    std::string train_id;
    std::string board_station;
    std::string alight_station;

    bool operator==(const RouteLeg&) const = default;
};

struct PassengerRoute {
    std::string id;
    int passenger_count = 1;
    std::vector<RouteLeg> legs;
    Minutes planned_arrival = 0;
};

struct Timetable {
    std::map<std::string, Station> stations;
    std::map<std::string, TrainRun> runs;
    std::vector<PassengerRoute> routes;
    Minutes day_length = 1440;
};

enum class EventKind { arrival, departure };

struct Event {
    Minutes time = 0;
    EventKind kind = EventKind::arrival;
    std::string train_id;
    int segment_index = 0;  // index of the segment that produced this event
};

struct EventList {
    std::string station;
    std::vector<Event> events;  // sorted by (time, kind, train, segment)

    int size() const { return static_cast<int>(events.size()); }
};

struct TransferOpportunity {
    std::string station;
    std::string from_train;
    int from_segment = 0;  // feeder's segment index (arrival side)
    std::string to_train;
    int to_segment = 0;  // connecting train's segment index (departure side)
    Minutes arr_time = 0;
    Minutes dep_time = 0;
    Minutes buffer = 0;  // dep_time - arr_time, the full interchange gap
};

class TimetableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Validates every structural invariant; throws TimetableError naming the
// offending entity. parse/import call this before returning.
void validate(const Timetable& tt, Minutes transfer_window = 120);

// One departure event per segment at its from-station, one arrival at its
// to-station. Every station of the timetable appears in the result, possibly
// with an empty list.
std::map<std::string, EventList> station_events(const Timetable& tt);

// Stations ordered by descending event count; ties by id ascending.
std::vector<std::string> station_rank(const std::map<std::string, int>& sizes);

inline std::map<std::string, int> station_sizes(const std::map<std::string, EventList>& ev) {
    std::map<std::string, int> sizes;
    for (const auto& [id, list] : ev) sizes[id] = list.size();
    return sizes;
}

// All (arrival, later departure of a different run) pairs per station with
// min_transfer <= dep - arr <= max_window.
std::vector<TransferOpportunity> derive_transfers(const Timetable& tt, Minutes max_window = 120);

// Mean interchange gap per station; stations without opportunities are absent.
std::map<std::string, double> buffering_times(const std::vector<TransferOpportunity>& transfers);

// Mean slack above the station's minimal interchange time (derived variant).
std::map<std::string, double> buffering_slack(const Timetable& tt,
                                              const std::vector<TransferOpportunity>& transfers);

// Mean gap over the transfers actually used by passenger routes.
std::map<std::string, double> buffering_times_realized(const Timetable& tt,
                                                       Minutes transfer_window = 120);

}  // namespace railsync
