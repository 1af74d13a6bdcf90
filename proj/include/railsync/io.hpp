#pragma once

#include <string>

#include "railsync/timetable.hpp"

namespace railsync {

// Native bundle: stations.csv, segments.csv and optional routes.csv inside
// one directory. See README for the column layout.
Timetable parse_timetable(const std::string& bundle_dir, Minutes transfer_window = 120);

// Writes the normalized bundle (stations sorted by id, segments by train and
// position). parse_timetable(serialize_timetable(tt)) == tt for valid input.
void serialize_timetable(const Timetable& tt, const std::string& bundle_dir,
                         const std::string& config_comment = "");

// GTFS column subset: stops.txt, trips.txt, stop_times.txt. Times are
// HH:MM:SS with hours beyond 23 for next-day events; seconds must be zero.
// Stations get default_min_transfer since GTFS carries no interchange times.
Timetable import_gtfs_subset(const std::string& dir, Minutes default_min_transfer = 5);

bool timetables_equal(const Timetable& a, const Timetable& b);

}  // namespace railsync
