#include "railsync/io.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "railsync/csv.hpp"

namespace railsync {

namespace fs = std::filesystem;

Timetable parse_timetable(const std::string& bundle_dir, Minutes transfer_window) {
    Timetable tt;

    const CsvTable stations = read_csv((fs::path(bundle_dir) / "stations.csv").string());
    const int st_id = stations.column("station_id");
    const int st_name = stations.column("name");
    const int st_mt = stations.column("min_transfer_min");
    for (std::size_t r = 0; r < stations.rows.size(); ++r) {
        Station st;
        st.id = stations.rows[r][st_id];
        st.name = stations.rows[r][st_name];
        st.min_transfer = parse_int_field(stations, r, st_mt);
        if (st.id.empty())
            throw CsvError(stations.file, stations.row_lines[r], "empty station_id");
        if (!tt.stations.emplace(st.id, st).second)
            throw CsvError(stations.file, stations.row_lines[r],
                           "duplicate station_id '" + st.id + "'");
    }

    const CsvTable segments = read_csv((fs::path(bundle_dir) / "segments.csv").string());
    const int sg_train = segments.column("train_id");
    const int sg_cat = segments.column("category");
    const int sg_from = segments.column("from_station");
    const int sg_dep = segments.column("dep_min");
    const int sg_to = segments.column("to_station");
    const int sg_arr = segments.column("arr_min");
    std::vector<std::string> train_order;
    for (std::size_t r = 0; r < segments.rows.size(); ++r) {
        const std::string train = segments.rows[r][sg_train];
        auto cat = category_from_string(segments.rows[r][sg_cat]);
        if (!cat)
            throw CsvError(segments.file, segments.row_lines[r],
                           "column 'category': unknown value '" + segments.rows[r][sg_cat] + "'");
        Segment seg;
        seg.from_station = segments.rows[r][sg_from];
        seg.dep_time = parse_int_field(segments, r, sg_dep);
        seg.to_station = segments.rows[r][sg_to];
        seg.arr_time = parse_int_field(segments, r, sg_arr);
        auto [it, inserted] = tt.runs.try_emplace(train);
        if (inserted) {
            it->second.id = train;
            it->second.category = *cat;
            train_order.push_back(train);
        } else if (it->second.category != *cat) {
            throw CsvError(segments.file, segments.row_lines[r],
                           "train '" + train + "': conflicting category");
        }
        it->second.segments.push_back(seg);
    }

    const fs::path routes_path = fs::path(bundle_dir) / "routes.csv";
    if (fs::exists(routes_path)) {
        const CsvTable routes = read_csv(routes_path.string());
        const int rt_id = routes.column("route_id");
        const int rt_pax = routes.column("passengers");
        const int rt_leg = routes.column("leg_index");
        const int rt_train = routes.column("train_id");
        const int rt_board = routes.column("board_station");
        const int rt_alight = routes.column("alight_station");
        std::map<std::string, std::size_t> index;
        for (std::size_t r = 0; r < routes.rows.size(); ++r) {
            const std::string id = routes.rows[r][rt_id];
            auto [it, inserted] = index.try_emplace(id, tt.routes.size());
            if (inserted) {
                PassengerRoute route;
                route.id = id;
                route.passenger_count = parse_int_field(routes, r, rt_pax);
                tt.routes.push_back(route);
            }
            PassengerRoute& route = tt.routes[it->second];
            const int leg_index = parse_int_field(routes, r, rt_leg);
            if (leg_index != static_cast<int>(route.legs.size()))
                throw CsvError(routes.file, routes.row_lines[r],
                               "route '" + id + "': leg_index " + std::to_string(leg_index) +
                                   " out of order");
            route.legs.push_back({routes.rows[r][rt_train], routes.rows[r][rt_board],
                                  routes.rows[r][rt_alight]});
        }
        // planned arrival is the scheduled arrival of the last leg
        for (auto& route : tt.routes) {
            const RouteLeg& leg = route.legs.back();
            auto it = tt.runs.find(leg.train_id);
            if (it == tt.runs.end())
                throw TimetableError("route '" + route.id + "': unknown train '" + leg.train_id +
                                     "'");
            bool found = false;
            bool boarded = false;
            for (const Segment& s : it->second.segments) {
                if (s.from_station == leg.board_station) boarded = true;
                if (boarded && s.to_station == leg.alight_station) {
                    route.planned_arrival = s.arr_time;
                    found = true;
                    break;
                }
            }
            if (!found)
                throw TimetableError("route '" + route.id + "': train '" + leg.train_id +
                                     "' does not serve " + leg.board_station + " -> " +
                                     leg.alight_station);
        }
    }

    validate(tt, transfer_window);
    return tt;
}

void serialize_timetable(const Timetable& tt, const std::string& bundle_dir,
                         const std::string& config_comment) {
    fs::create_directories(bundle_dir);
    const auto open = [&](const char* name) {
        std::ofstream out(fs::path(bundle_dir) / name);
        if (!out) throw TimetableError(std::string("cannot write ") + name);
        if (!config_comment.empty()) out << "# " << config_comment << "\n";
        return out;
    };

    {
        auto out = open("stations.csv");
        out << "station_id,name,min_transfer_min\n";
        for (const auto& [id, st] : tt.stations)
            out << csv_escape(id) << ',' << csv_escape(st.name) << ',' << st.min_transfer << '\n';
    }
    {
        auto out = open("segments.csv");
        out << "train_id,category,from_station,dep_min,to_station,arr_min\n";
        for (const auto& [id, run] : tt.runs)
            for (const Segment& s : run.segments)
                out << csv_escape(id) << ',' << to_string(run.category) << ','
                    << csv_escape(s.from_station) << ',' << s.dep_time << ','
                    << csv_escape(s.to_station) << ',' << s.arr_time << '\n';
    }
    if (!tt.routes.empty()) {
        auto out = open("routes.csv");
        out << "route_id,passengers,leg_index,train_id,board_station,alight_station\n";
        for (const auto& route : tt.routes)
            for (std::size_t li = 0; li < route.legs.size(); ++li)
                out << csv_escape(route.id) << ',' << route.passenger_count << ',' << li << ','
                    << csv_escape(route.legs[li].train_id) << ','
                    << csv_escape(route.legs[li].board_station) << ','
                    << csv_escape(route.legs[li].alight_station) << '\n';
    }
}

namespace {

Minutes parse_gtfs_time(const CsvTable& t, std::size_t row, int col) {
    const std::string& s = t.rows[row][col];
    int h = 0, m = 0, sec = 0;
    char c1 = 0, c2 = 0;
    std::size_t consumed = 0;
    if (std::sscanf(s.c_str(), "%d%c%d%c%d%zn", &h, &c1, &m, &c2, &sec, &consumed) != 5 ||
        c1 != ':' || c2 != ':' || consumed != s.size() || h < 0 || m < 0 || m > 59 || sec < 0 ||
        sec > 59)
        throw CsvError(t.file, t.row_lines[row],
                       "column '" + t.header[col] + "': unparseable time '" + s + "'");
    if (sec != 0)
        throw CsvError(t.file, t.row_lines[row],
                       "column '" + t.header[col] + "': sub-minute time '" + s + "' not supported");
    return h * 60 + m;
}

TrainCategory category_from_route(const std::string& route_id) {
    if (route_id.find("ICE") != std::string::npos) return TrainCategory::long_distance_fast;
    if (route_id.find("IC") != std::string::npos || route_id.find("EC") != std::string::npos)
        return TrainCategory::long_distance;
    return TrainCategory::other;
}

}  // namespace

Timetable import_gtfs_subset(const std::string& dir, Minutes default_min_transfer) {
    Timetable tt;

    const CsvTable stops = read_csv((fs::path(dir) / "stops.txt").string());
    const int stop_id = stops.column("stop_id");
    const int stop_name = stops.column("stop_name");
    for (std::size_t r = 0; r < stops.rows.size(); ++r) {
        Station st;
        st.id = stops.rows[r][stop_id];
        st.name = stops.rows[r][stop_name];
        st.min_transfer = default_min_transfer;
        if (!tt.stations.emplace(st.id, st).second)
            throw CsvError(stops.file, stops.row_lines[r], "duplicate stop_id '" + st.id + "'");
    }

    const CsvTable trips = read_csv((fs::path(dir) / "trips.txt").string());
    const int trip_id = trips.column("trip_id");
    const int trip_route = trips.column("route_id");
    std::map<std::string, TrainCategory> trip_category;
    for (std::size_t r = 0; r < trips.rows.size(); ++r) {
        const std::string id = trips.rows[r][trip_id];
        if (!trip_category.emplace(id, category_from_route(trips.rows[r][trip_route])).second)
            throw CsvError(trips.file, trips.row_lines[r], "duplicated trip id '" + id + "'");
    }

    const CsvTable st = read_csv((fs::path(dir) / "stop_times.txt").string());
    const int st_trip = st.column("trip_id");
    const int st_seq = st.column("stop_sequence");
    const int st_arr = st.column("arrival_time");
    const int st_dep = st.column("departure_time");
    const int st_stop = st.column("stop_id");
    struct StopTime {
        int seq;
        Minutes arr;
        Minutes dep;
        std::string stop;
        int line;
    };
    std::map<std::string, std::vector<StopTime>> by_trip;
    for (std::size_t r = 0; r < st.rows.size(); ++r) {
        const std::string trip = st.rows[r][st_trip];
        if (!trip_category.count(trip))
            throw CsvError(st.file, st.row_lines[r], "stop_time for unknown trip '" + trip + "'");
        by_trip[trip].push_back({parse_int_field(st, r, st_seq), parse_gtfs_time(st, r, st_arr),
                                 parse_gtfs_time(st, r, st_dep), st.rows[r][st_stop],
                                 st.row_lines[r]});
    }

    for (auto& [trip, stops_of_trip] : by_trip) {
        std::sort(stops_of_trip.begin(), stops_of_trip.end(),
                  [](const StopTime& a, const StopTime& b) { return a.seq < b.seq; });
        if (stops_of_trip.size() < 2)
            throw TimetableError("trip '" + trip + "' has fewer than two stop_times");
        TrainRun run;
        run.id = trip;
        run.category = trip_category.at(trip);
        for (std::size_t i = 0; i + 1 < stops_of_trip.size(); ++i) {
            Segment seg;
            seg.from_station = stops_of_trip[i].stop;
            seg.dep_time = stops_of_trip[i].dep;
            seg.to_station = stops_of_trip[i + 1].stop;
            seg.arr_time = stops_of_trip[i + 1].arr;
            run.segments.push_back(seg);
        }
        tt.runs.emplace(trip, std::move(run));
    }

    validate(tt);
    return tt;
}

bool timetables_equal(const Timetable& a, const Timetable& b) {
    if (a.day_length != b.day_length) return false;
    if (a.stations.size() != b.stations.size() || a.runs.size() != b.runs.size() ||
        a.routes.size() != b.routes.size())
        return false;
    for (const auto& [id, st] : a.stations) {
        auto it = b.stations.find(id);
        if (it == b.stations.end() || it->second.name != st.name ||
            it->second.min_transfer != st.min_transfer)
            return false;
    }
    for (const auto& [id, run] : a.runs) {
        auto it = b.runs.find(id);
        if (it == b.runs.end() || it->second.category != run.category ||
            it->second.segments != run.segments)
            return false;
    }
    for (std::size_t i = 0; i < a.routes.size(); ++i) {
        const PassengerRoute& ra = a.routes[i];
        const PassengerRoute& rb = b.routes[i];
        if (ra.id != rb.id || ra.passenger_count != rb.passenger_count || ra.legs != rb.legs ||
            ra.planned_arrival != rb.planned_arrival)
            return false;
    }
    return true;
}

}  // namespace railsync
