#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "railsync/timetable.hpp"

namespace railsync {

// Planted-synchronization band: stations whose event count falls inside
// [min_events, max_events] get all their events retimed onto the grid
// t = snap_offset (mod snap_period), which clusters their phases.
struct SyncBand {
    int min_events = 81;
    int max_events = 170;
    Minutes snap_period = 120;
    Minutes snap_offset = 0;
};

// Mesh of lines over a rectangular grid; trains start at the line endpoints
// every period, shifted by the line phase. Periods and phases are drawn per
// line from the seed unless given explicitly.
struct SyntheticParams {
    int grid_width = 16;
    int grid_height = 16;
    int line_count = 40;
    std::vector<Minutes> allowed_periods = {30, 60, 120};
    std::vector<Minutes> line_periods;  // optional, one entry per line
    std::vector<Minutes> line_phases;   // optional, one entry per line
    Minutes hop_minutes = 8;
    Minutes hop_spread = 0;  // per-line hop time drawn from hop_minutes +- spread
    Minutes dwell_minutes = 2;
    Minutes service_span = 1440;
    Minutes min_transfer = 5;
    int route_count = 0;
    int max_route_legs = 3;
    double route_transfer_prob = 0.6;  // chance to extend a route beyond each leg
    Minutes transfer_window = 120;
    std::optional<SyncBand> band;
};

// Deterministic for fixed (params, seed).
Timetable generate_synthetic(const SyntheticParams& params, std::uint64_t seed);

}  // namespace railsync
