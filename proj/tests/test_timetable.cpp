#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "railsync/csv.hpp"
#include "railsync/io.hpp"
#include "railsync/synthetic.hpp"
#include "railsync/timetable.hpp"
#include "test_util.hpp"

using namespace railsync;

namespace {

void write_minimal_bundle(const std::filesystem::path& dir) {
    testutil::write_file(dir / "stations.csv",
                         "station_id,name,min_transfer_min\n"
                         "A,Alpha,5\n"
                         "B,Beta,5\n");
    testutil::write_file(dir / "segments.csv",
                         "train_id,category,from_station,dep_min,to_station,arr_min\n"
                         "T1,long_distance,A,600,B,640\n");
}

}  // namespace

TEST_CASE("parse_timetable accepts a minimal 2-station bundle") {
    testutil::TempDir dir("parse-min");
    write_minimal_bundle(dir.path());
    const Timetable tt = parse_timetable(dir.str());
    CHECK(tt.stations.size() == 2);
    CHECK(tt.runs.size() == 1);
    CHECK(tt.runs.at("T1").segments.size() == 1);
    CHECK(tt.runs.at("T1").segments[0].arr_time == 640);
}

TEST_CASE("parse_timetable rejects a segment arriving before it departs") {
    testutil::TempDir dir("parse-bad");
    testutil::write_file(dir.path() / "stations.csv",
                         "station_id,name,min_transfer_min\nA,Alpha,5\nB,Beta,5\n");
    testutil::write_file(dir.path() / "segments.csv",
                         "train_id,category,from_station,dep_min,to_station,arr_min\n"
                         "T1,other,A,600,B,600\n");
    CHECK_THROWS_WITH_AS(parse_timetable(dir.str()),
                         doctest::Contains("segment 0"), TimetableError);
}

TEST_CASE("parse_timetable reports malformed rows with line numbers") {
    testutil::TempDir dir("parse-line");
    testutil::write_file(dir.path() / "stations.csv",
                         "station_id,name,min_transfer_min\nA,Alpha,5\nB,Beta,oops\n");
    testutil::write_file(dir.path() / "segments.csv",
                         "train_id,category,from_station,dep_min,to_station,arr_min\n");
    try {
        parse_timetable(dir.str());
        FAIL("expected CsvError");
    } catch (const CsvError& e) {
        CHECK(e.line() == 3);
        CHECK(std::string(e.what()).find("min_transfer_min") != std::string::npos);
    }
}

TEST_CASE("parse_timetable rejects dangling station references") {
    testutil::TempDir dir("parse-dangling");
    testutil::write_file(dir.path() / "stations.csv",
                         "station_id,name,min_transfer_min\nA,Alpha,5\n");
    testutil::write_file(dir.path() / "segments.csv",
                         "train_id,category,from_station,dep_min,to_station,arr_min\n"
                         "T1,other,A,600,Z,640\n");
    CHECK_THROWS_WITH_AS(parse_timetable(dir.str()), doctest::Contains("'Z'"), TimetableError);
}

TEST_CASE("parse_timetable rejects sub-minute times") {
    testutil::TempDir dir("parse-subminute");
    testutil::write_file(dir.path() / "stations.csv",
                         "station_id,name,min_transfer_min\nA,Alpha,5\nB,Beta,5\n");
    testutil::write_file(dir.path() / "segments.csv",
                         "train_id,category,from_station,dep_min,to_station,arr_min\n"
                         "T1,other,A,600.5,B,640\n");
    CHECK_THROWS_AS(parse_timetable(dir.str()), CsvError);
}

TEST_CASE("parse_timetable handles a German-scale bundle") {
    testutil::TempDir dir("parse-scale");
    const int n_stations = 2622;
    const int n_segments = 43772;
    std::string stations = "station_id,name,min_transfer_min\n";
    for (int i = 0; i < n_stations; ++i) {
        char row[64];
        std::snprintf(row, sizeof(row), "S%04d,Station %d,5\n", i, i);
        stations += row;
    }
    std::string segments = "train_id,category,from_station,dep_min,to_station,arr_min\n";
    int written = 0;
    for (int train = 0; written < n_segments; ++train) {
        const int a = (train * 7) % n_stations;
        const int b = (a + 1) % n_stations;
        const int c = (a + 2) % n_stations;
        const int t0 = 200 + (train % 1200);
        char row[128];
        std::snprintf(row, sizeof(row), "T%05d,long_distance,S%04d,%d,S%04d,%d\n", train, a, t0,
                      b, t0 + 20);
        segments += row;
        ++written;
        if (written < n_segments) {
            std::snprintf(row, sizeof(row), "T%05d,long_distance,S%04d,%d,S%04d,%d\n", train, b,
                          t0 + 25, c, t0 + 45);
            segments += row;
            ++written;
        }
    }
    testutil::write_file(dir.path() / "stations.csv", stations);
    testutil::write_file(dir.path() / "segments.csv", segments);

    const Timetable tt = parse_timetable(dir.str());
    CHECK(tt.stations.size() == n_stations);
    int total_segments = 0;
    for (const auto& [id, run] : tt.runs) total_segments += static_cast<int>(run.segments.size());
    CHECK(total_segments == n_segments);

    // event bookkeeping: every segment contributes one departure and one arrival
    const auto events = station_events(tt);
    long long total_events = 0;
    for (const auto& [id, list] : events) total_events += list.size();
    CHECK(total_events == 2LL * n_segments);
}

TEST_CASE("station_events splits arrivals and departures") {
    Timetable tt;
    tt.stations.emplace("A", testutil::station("A", 5));
    tt.stations.emplace("B", testutil::station("B", 5));
    tt.stations.emplace("C", testutil::station("C", 5));
    TrainRun r;
    r.id = "T1";
    r.segments.push_back({"A", 600, "B", 640});
    r.segments.push_back({"B", 645, "C", 700});
    tt.runs.emplace("T1", r);
    validate(tt);

    const auto events = station_events(tt);
    CHECK(events.at("A").size() == 1);
    CHECK(events.at("A").events[0].kind == EventKind::departure);
    CHECK(events.at("B").size() == 2);  // interior: one arrival, one departure
    CHECK(events.at("C").size() == 1);
    CHECK(events.at("C").events[0].kind == EventKind::arrival);
    // sorted ascending
    CHECK(events.at("B").events[0].time <= events.at("B").events[1].time);
}

TEST_CASE("station_rank orders by size with id tie-break") {
    CHECK(station_rank({{"A", 10}, {"B", 300}, {"C", 40}}) ==
          std::vector<std::string>{"B", "C", "A"});
    CHECK(station_rank({{"B", 10}, {"A", 10}}) == std::vector<std::string>{"A", "B"});
    CHECK(station_rank({{"solo", 3}}) == std::vector<std::string>{"solo"});
}

TEST_CASE("derive_transfers honors min_transfer and the window") {
    Timetable tt;
    tt.stations.emplace("A", testutil::station("A", 0));
    tt.stations.emplace("X", testutil::station("X", 5));
    tt.stations.emplace("B", testutil::station("B", 0));
    tt.runs.emplace("T1", testutil::run1("T1", TrainCategory::other, "A", 560, "X", 600));

    SUBCASE("buffer 7 is kept") {
        tt.runs.emplace("T2", testutil::run1("T2", TrainCategory::other, "X", 607, "B", 650));
        validate(tt);
        const auto transfers = derive_transfers(tt, 120);
        REQUIRE(transfers.size() == 1);
        CHECK(transfers[0].buffer == 7);
        CHECK(transfers[0].station == "X");
    }
    SUBCASE("buffer below min_transfer is excluded") {
        tt.runs.emplace("T2", testutil::run1("T2", TrainCategory::other, "X", 603, "B", 650));
        validate(tt);
        CHECK(derive_transfers(tt, 120).empty());
    }
    SUBCASE("buffer beyond the window is excluded") {
        tt.runs.emplace("T2", testutil::run1("T2", TrainCategory::other, "X", 800, "B", 850));
        validate(tt);
        CHECK(derive_transfers(tt, 120).empty());
    }
    SUBCASE("same-train pairs never count") {
        validate(tt);
        CHECK(derive_transfers(tt, 120).empty());
    }
}

TEST_CASE("buffering_times averages per station") {
    std::vector<TransferOpportunity> transfers = {
        {"X", "T1", 0, "T2", 0, 600, 607, 7},
        {"X", "T1", 0, "T3", 0, 600, 609, 9},
    };
    const auto b = buffering_times(transfers);
    REQUIRE(b.count("X") == 1);
    CHECK(b.at("X") == doctest::Approx(8.0));
    CHECK(b.count("Y") == 0);
}

TEST_CASE("buffering_times_realized averages over route transfers") {
    Timetable tt;
    tt.stations.emplace("A", testutil::station("A", 0));
    tt.stations.emplace("X", testutil::station("X", 2));
    tt.stations.emplace("B", testutil::station("B", 0));
    tt.runs.emplace("T1", testutil::run1("T1", TrainCategory::other, "A", 560, "X", 600));
    tt.runs.emplace("T2", testutil::run1("T2", TrainCategory::other, "X", 607, "B", 650));
    tt.runs.emplace("T3", testutil::run1("T3", TrainCategory::other, "X", 611, "B", 660));
    PassengerRoute r1;
    r1.id = "R1";
    r1.passenger_count = 3;
    r1.legs = {{"T1", "A", "X"}, {"T2", "X", "B"}};
    r1.planned_arrival = 650;
    PassengerRoute r2;
    r2.id = "R2";
    r2.passenger_count = 1;
    r2.legs = {{"T1", "A", "X"}, {"T3", "X", "B"}};
    r2.planned_arrival = 660;
    tt.routes = {r1, r2};
    validate(tt);
    const auto realized = buffering_times_realized(tt);
    REQUIRE(realized.count("X") == 1);
    // passenger-weighted: (3*7 + 1*11) / 4
    CHECK(realized.at("X") == doctest::Approx(8.0));
    // opportunity average ignores passengers: (7 + 11) / 2
    CHECK(buffering_times(derive_transfers(tt, 120)).at("X") == doctest::Approx(9.0));
}

TEST_CASE("sum of station sizes is twice the segment count") {
    SyntheticParams params;
    params.grid_width = 6;
    params.grid_height = 6;
    params.line_count = 8;
    params.route_count = 0;
    const Timetable tt = generate_synthetic(params, 42);
    long long segments = 0;
    for (const auto& [id, run] : tt.runs) segments += static_cast<long long>(run.segments.size());
    long long events = 0;
    for (const auto& [id, list] : station_events(tt)) events += list.size();
    CHECK(events == 2 * segments);
}

TEST_CASE("serialize and parse round-trip") {
    SyntheticParams params;
    params.grid_width = 5;
    params.grid_height = 5;
    params.line_count = 6;
    params.route_count = 25;
    const Timetable tt = generate_synthetic(params, 7);
    testutil::TempDir dir("roundtrip");
    serialize_timetable(tt, dir.str());
    const Timetable back = parse_timetable(dir.str());
    CHECK(timetables_equal(tt, back));
}

TEST_CASE("generate_synthetic emits span/period trains per direction") {
    SyntheticParams params;
    params.grid_width = 8;
    params.grid_height = 8;
    params.line_count = 1;
    params.line_periods = {60};
    params.line_phases = {0};
    params.service_span = 1440;
    params.route_count = 0;
    const Timetable tt = generate_synthetic(params, 3);
    CHECK(tt.runs.size() == 48);  // 24 trains per direction
    int forward = 0;
    for (const auto& [id, run] : tt.runs)
        if (id.find('F') != std::string::npos) ++forward;
    CHECK(forward == 24);
}

TEST_CASE("generate_synthetic is a pure function of params and seed") {
    SyntheticParams params;
    params.grid_width = 6;
    params.grid_height = 7;
    params.line_count = 9;
    params.route_count = 40;
    const Timetable a = generate_synthetic(params, 99);
    const Timetable b = generate_synthetic(params, 99);
    CHECK(timetables_equal(a, b));
    testutil::TempDir da("det-a"), db("det-b");
    serialize_timetable(a, da.str());
    serialize_timetable(b, db.str());
    for (const char* name : {"stations.csv", "segments.csv", "routes.csv"}) {
        std::ifstream fa(da.path() / name), fb(db.path() / name);
        std::string ca((std::istreambuf_iterator<char>(fa)), {});
        std::string cb((std::istreambuf_iterator<char>(fb)), {});
        CHECK(ca == cb);
    }
    const Timetable c = generate_synthetic(params, 100);
    CHECK_FALSE(timetables_equal(a, c));
}

TEST_CASE("generate_synthetic rejects infeasible parameters") {
    SyntheticParams params;
    params.line_count = 0;
    CHECK_THROWS_AS(generate_synthetic(params, 1), TimetableError);
    params.line_count = 3;
    params.service_span = 0;
    CHECK_THROWS_AS(generate_synthetic(params, 1), TimetableError);
}

TEST_CASE("synthetic event sizes have a heavy right tail") {
    SyntheticParams params;
    params.grid_width = 16;
    params.grid_height = 16;
    params.line_count = 40;
    const Timetable tt = generate_synthetic(params, 11);
    std::vector<int> sizes;
    for (const auto& [id, list] : station_events(tt))
        if (list.size() > 0) sizes.push_back(list.size());
    std::sort(sizes.begin(), sizes.end());
    const int max = sizes.back();
    const int med = sizes[sizes.size() / 2];
    CHECK(max >= 2 * med);
}

TEST_CASE("import_gtfs_subset maps trips to runs") {
    testutil::TempDir dir("gtfs");
    testutil::write_file(dir.path() / "stops.txt",
                         "stop_id,stop_name\nS1,First\nS2,Second\nS3,Third\n");
    testutil::write_file(dir.path() / "trips.txt", "trip_id,route_id\nTR1,ICE 100\n");
    testutil::write_file(dir.path() / "stop_times.txt",
                         "trip_id,stop_sequence,arrival_time,departure_time,stop_id\n"
                         "TR1,1,10:00:00,10:05:00,S1\n"
                         "TR1,2,10:35:00,10:40:00,S2\n"
                         "TR1,3,11:10:00,11:15:00,S3\n");
    const Timetable tt = import_gtfs_subset(dir.str());
    REQUIRE(tt.runs.size() == 1);
    const TrainRun& run = tt.runs.at("TR1");
    CHECK(run.category == TrainCategory::long_distance_fast);
    REQUIRE(run.segments.size() == 2);
    CHECK(run.segments[0].dep_time == 605);
    CHECK(run.segments[0].arr_time == 635);
    CHECK(run.segments[1].arr_time == 670);
    CHECK(tt.routes.empty());
}

TEST_CASE("import_gtfs_subset keeps times past midnight") {
    testutil::TempDir dir("gtfs-night");
    testutil::write_file(dir.path() / "stops.txt", "stop_id,stop_name\nS1,First\nS2,Second\n");
    testutil::write_file(dir.path() / "trips.txt", "trip_id,route_id\nTR1,RB 10\n");
    testutil::write_file(dir.path() / "stop_times.txt",
                         "trip_id,stop_sequence,arrival_time,departure_time,stop_id\n"
                         "TR1,1,23:50:00,23:55:00,S1\n"
                         "TR1,2,25:10:00,25:12:00,S2\n");
    const Timetable tt = import_gtfs_subset(dir.str());
    CHECK(tt.runs.at("TR1").segments[0].arr_time == 1510);
}

TEST_CASE("import_gtfs_subset rejects duplicate trips and bad times") {
    testutil::TempDir dir("gtfs-bad");
    testutil::write_file(dir.path() / "stops.txt", "stop_id,stop_name\nS1,First\nS2,Second\n");
    testutil::write_file(dir.path() / "stop_times.txt",
                         "trip_id,stop_sequence,arrival_time,departure_time,stop_id\n"
                         "TR1,1,10:00:00,10:05:00,S1\n"
                         "TR1,2,10:35:00,10:40:00,S2\n");
    SUBCASE("duplicate trip id") {
        testutil::write_file(dir.path() / "trips.txt",
                             "trip_id,route_id\nTR1,ICE 1\nTR1,ICE 2\n");
        CHECK_THROWS_WITH_AS(import_gtfs_subset(dir.str()), doctest::Contains("duplicated trip"),
                             CsvError);
    }
    SUBCASE("missing required column") {
        testutil::write_file(dir.path() / "trips.txt", "trip,route_id\nTR1,ICE 1\n");
        CHECK_THROWS_WITH_AS(import_gtfs_subset(dir.str()), doctest::Contains("trip_id"),
                             CsvError);
    }
    SUBCASE("unparseable time") {
        testutil::write_file(dir.path() / "trips.txt", "trip_id,route_id\nTR1,ICE 1\n");
        testutil::write_file(dir.path() / "stop_times.txt",
                             "trip_id,stop_sequence,arrival_time,departure_time,stop_id\n"
                             "TR1,1,10:00,10:05:00,S1\n"
                             "TR1,2,10:35:00,10:40:00,S2\n");
        CHECK_THROWS_WITH_AS(import_gtfs_subset(dir.str()), doctest::Contains("unparseable"),
                             CsvError);
    }
}

TEST_CASE("every derived transfer satisfies its bounds") {
    SyntheticParams params;
    params.grid_width = 8;
    params.grid_height = 8;
    params.line_count = 12;
    const Timetable tt = generate_synthetic(params, 5);
    for (const auto& tr : derive_transfers(tt, 120)) {
        CHECK(tr.buffer >= tt.stations.at(tr.station).min_transfer);
        CHECK(tr.buffer <= 120);
        CHECK(tr.from_train != tr.to_train);
        CHECK(tr.buffer == tr.dep_time - tr.arr_time);
    }
}
