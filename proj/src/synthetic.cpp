#include "railsync/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "railsync/rng.hpp"

namespace railsync {

namespace {

struct GridPoint {
    int x = 0;
    int y = 0;
};

std::string station_id(int x, int y) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "S%02d_%02d", x, y);
    return buf;
}

// Shortest grid path as a single L: along x first or y first.
std::vector<GridPoint> l_path(GridPoint a, GridPoint b, bool x_first) {
    std::vector<GridPoint> path;
    GridPoint cur = a;
    path.push_back(cur);
    const auto walk_x = [&] {
        while (cur.x != b.x) {
            cur.x += (b.x > cur.x) ? 1 : -1;
            path.push_back(cur);
        }
    };
    const auto walk_y = [&] {
        while (cur.y != b.y) {
            cur.y += (b.y > cur.y) ? 1 : -1;
            path.push_back(cur);
        }
    };
    if (x_first) {
        walk_x();
        walk_y();
    } else {
        walk_y();
        walk_x();
    }
    return path;
}

TrainCategory category_for_period(Minutes period) {
    if (period >= 120) return TrainCategory::long_distance_fast;
    if (period >= 60) return TrainCategory::long_distance;
    return TrainCategory::other;
}

Minutes snap_up(Minutes t, Minutes grid, Minutes offset) {
    const Minutes r = ((t - offset) % grid + grid) % grid;
    return r == 0 ? t : t + (grid - r);
}

struct Line {
    std::vector<std::string> stations;
    Minutes period = 60;
    Minutes phase = 0;
    Minutes hop = 8;
};

}  // namespace

Timetable generate_synthetic(const SyntheticParams& params, std::uint64_t seed) {
    if (params.grid_width < 2 || params.grid_height < 2)
        throw TimetableError("generate_synthetic: grid must be at least 2x2");
    if (params.line_count <= 0) throw TimetableError("generate_synthetic: need at least one line");
    if (params.service_span <= 0) throw TimetableError("generate_synthetic: empty service span");
    if (params.hop_minutes <= 0) throw TimetableError("generate_synthetic: hop time must be positive");
    if (params.allowed_periods.empty() && params.line_periods.empty())
        throw TimetableError("generate_synthetic: no line periods given");

    Timetable tt;
    for (int x = 0; x < params.grid_width; ++x) {
        for (int y = 0; y < params.grid_height; ++y) {
            Station st;
            st.id = station_id(x, y);
            char name[48];
            std::snprintf(name, sizeof(name), "Grid Station %d/%d", x, y);
            st.name = name;
            st.min_transfer = params.min_transfer;
            tt.stations.emplace(st.id, st);
        }
    }

    auto line_rng = make_engine(derive_seed(seed, "lines"));
    std::uniform_int_distribution<int> xs(0, params.grid_width - 1);
    std::uniform_int_distribution<int> ys(0, params.grid_height - 1);
    const int min_hops = std::max(2, (params.grid_width + params.grid_height) / 4);

    std::vector<Line> lines;
    for (int li = 0; li < params.line_count; ++li) {
        GridPoint a, b;
        do {
            a = {xs(line_rng), ys(line_rng)};
            b = {xs(line_rng), ys(line_rng)};
        } while (std::abs(a.x - b.x) + std::abs(a.y - b.y) < min_hops);
        const bool x_first = std::uniform_int_distribution<int>(0, 1)(line_rng) == 1;

        Line line;
        for (const GridPoint& p : l_path(a, b, x_first)) line.stations.push_back(station_id(p.x, p.y));
        if (li < static_cast<int>(params.line_periods.size())) {
            line.period = params.line_periods[li];
        } else {
            std::uniform_int_distribution<std::size_t> pick(0, params.allowed_periods.size() - 1);
            line.period = params.allowed_periods[pick(line_rng)];
        }
        if (line.period <= 0) throw TimetableError("generate_synthetic: period must be positive");
        if (li < static_cast<int>(params.line_phases.size()))
            line.phase = ((params.line_phases[li] % line.period) + line.period) % line.period;
        else
            line.phase = std::uniform_int_distribution<Minutes>(0, line.period - 1)(line_rng);
        line.hop = params.hop_minutes;
        if (params.hop_spread > 0)
            line.hop = std::max<Minutes>(
                1, params.hop_minutes + std::uniform_int_distribution<Minutes>(
                                            -params.hop_spread, params.hop_spread)(line_rng));
        lines.push_back(std::move(line));
    }

    const Minutes dwell = std::max<Minutes>(0, params.dwell_minutes);
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const Line& line = lines[li];
        for (int dir = 0; dir < 2; ++dir) {
            std::vector<std::string> path = line.stations;
            if (dir == 1) std::reverse(path.begin(), path.end());
            int k = 0;
            for (Minutes start = line.phase; start < params.service_span; start += line.period, ++k) {
                TrainRun run;
                char id[48];
                std::snprintf(id, sizeof(id), "L%03zu%c%03d", li, dir == 0 ? 'F' : 'R', k);
                run.id = id;
                run.category = category_for_period(line.period);
                Minutes t = start;
                for (std::size_t s = 0; s + 1 < path.size(); ++s) {
                    Segment seg;
                    seg.from_station = path[s];
                    seg.dep_time = t;
                    seg.to_station = path[s + 1];
                    seg.arr_time = t + line.hop;
                    run.segments.push_back(seg);
                    t = seg.arr_time + dwell;
                }
                tt.runs.emplace(run.id, std::move(run));
            }
        }
    }

    if (params.band) {
        // Find stations whose event count falls in the band, then retime every
        // run so events at those stations land on the snap grid. Snapping only
        // moves times forward, so run monotonicity is preserved and counts do
        // not change.
        const SyncBand& band = *params.band;
        if (band.snap_period <= 0)
            throw TimetableError("generate_synthetic: band snap period must be positive");
        std::map<std::string, int> counts;
        for (const auto& [id, run] : tt.runs) {
            for (const Segment& s : run.segments) {
                ++counts[s.from_station];
                ++counts[s.to_station];
            }
        }
        std::map<std::string, bool> banded;
        for (const auto& [id, c] : counts)
            banded[id] = c >= band.min_events && c <= band.max_events;

        for (auto& [id, run] : tt.runs) {
            Minutes new_prev_arr = 0;
            Minutes orig_prev_arr = 0;
            for (std::size_t s = 0; s < run.segments.size(); ++s) {
                Segment& seg = run.segments[s];
                const Minutes duration = seg.arr_time - seg.dep_time;
                const Minutes dwell_here = s == 0 ? 0 : seg.dep_time - orig_prev_arr;
                orig_prev_arr = seg.arr_time;
                Minutes dep = s == 0 ? seg.dep_time : new_prev_arr + dwell_here;
                if (banded.at(seg.from_station))
                    dep = snap_up(dep, band.snap_period, band.snap_offset);
                Minutes arr = dep + duration;
                if (banded.at(seg.to_station))
                    arr = snap_up(arr, band.snap_period, band.snap_offset);
                seg.dep_time = dep;
                seg.arr_time = arr;
                new_prev_arr = arr;
            }
        }
    }

    if (params.route_count > 0) {
        const auto transfers = derive_transfers(tt, params.transfer_window);
        // arrival (train, segment) -> possible onward departures
        std::map<std::pair<std::string, int>, std::vector<const TransferOpportunity*>> onward;
        for (const auto& t : transfers) onward[{t.from_train, t.from_segment}].push_back(&t);

        std::vector<const TrainRun*> runs;
        runs.reserve(tt.runs.size());
        for (const auto& [id, run] : tt.runs) runs.push_back(&run);

        auto route_rng = make_engine(derive_seed(seed, "routes"));
        std::uniform_int_distribution<std::size_t> pick_run(0, runs.size() - 1);
        std::uniform_int_distribution<int> pick_pax(1, 5);
        std::uniform_real_distribution<double> coin(0.0, 1.0);

        for (int ri = 0; ri < params.route_count; ++ri) {
            PassengerRoute route;
            char id[32];
            std::snprintf(id, sizeof(id), "R%06d", ri);
            route.id = id;
            route.passenger_count = pick_pax(route_rng);

            const TrainRun* run = runs[pick_run(route_rng)];
            const int nseg = static_cast<int>(run->segments.size());
            int board = std::uniform_int_distribution<int>(0, nseg - 1)(route_rng);
            int alight = std::uniform_int_distribution<int>(board, nseg - 1)(route_rng);
            route.legs.push_back({run->id, run->segments[board].from_station,
                                  run->segments[alight].to_station});
            Minutes arrival = run->segments[alight].arr_time;

            std::pair<std::string, int> at{run->id, alight};
            while (static_cast<int>(route.legs.size()) < params.max_route_legs &&
                   coin(route_rng) < params.route_transfer_prob) {
                auto it = onward.find(at);
                if (it == onward.end() || it->second.empty()) break;
                std::uniform_int_distribution<std::size_t> pick_tr(0, it->second.size() - 1);
                const TransferOpportunity* tr = it->second[pick_tr(route_rng)];
                const TrainRun& next = tt.runs.at(tr->to_train);
                const int nn = static_cast<int>(next.segments.size());
                const int nalight =
                    std::uniform_int_distribution<int>(tr->to_segment, nn - 1)(route_rng);
                route.legs.push_back({next.id, tr->station, next.segments[nalight].to_station});
                arrival = next.segments[nalight].arr_time;
                at = {next.id, nalight};
            }
            route.planned_arrival = arrival;
            tt.routes.push_back(std::move(route));
        }
    }

    validate(tt, params.transfer_window);
    return tt;
}

}  // namespace railsync
