#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "test_util.hpp"

#ifndef RAILSYNC_CLI
#error "RAILSYNC_CLI must point at the railsync binary"
#endif

namespace {

namespace fs = std::filesystem;

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd =
        std::string(RAILSYNC_CLI) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("generate, sync, sweep and report produce the full artifact set") {
    testutil::TempDir dir("cli-pipeline");
    const fs::path log = dir.path() / "log.txt";
    const std::string out = dir.str();

    CHECK(run_cli("generate --grid 8x8 --lines 10 --routes 150 --seed 3 --out-dir " + out, log) == 0);
    CHECK(fs::exists(dir.path() / "bundle" / "stations.csv"));
    CHECK(fs::exists(dir.path() / "bundle" / "segments.csv"));
    CHECK(fs::exists(dir.path() / "bundle" / "routes.csv"));

    CHECK(run_cli("sync --bundle " + out + "/bundle --window 0 --out-dir " + out, log) == 0);
    CHECK(fs::exists(dir.path() / "sync.csv"));
    CHECK(fs::exists(dir.path() / "sync_profile.csv"));
    CHECK(fs::exists(dir.path() / "sync_categories.csv"));

    CHECK(run_cli("sweep --bundle " + out + "/bundle --p 5,30 --out-dir " + out, log) == 0);
    CHECK(fs::exists(dir.path() / "sweep.csv"));

    CHECK(run_cli("report --bundle " + out + "/bundle --out-dir " + out, log) == 0);
    CHECK(fs::exists(dir.path() / "metrics.csv"));
    CHECK(fs::exists(dir.path() / "profile.csv"));
    CHECK(fs::exists(dir.path() / "quadrants.csv"));
    CHECK(fs::exists(dir.path() / "correlation.csv"));

    // artifacts are self-describing
    const std::string sync_head = slurp(dir.path() / "sync.csv");
    CHECK(sync_head.rfind("# config:", 0) == 0);
}

TEST_CASE("ingest validates and normalizes a bundle") {
    testutil::TempDir dir("cli-ingest");
    const fs::path log = dir.path() / "log.txt";
    const std::string out = dir.str();
    REQUIRE(run_cli("generate --grid 6x6 --lines 6 --seed 9 --out-dir " + out, log) == 0);
    const std::string normalized = out + "/normalized";
    CHECK(run_cli("ingest --bundle " + out + "/bundle --out-dir " + normalized, log) == 0);
    CHECK(fs::exists(fs::path(normalized) / "bundle" / "segments.csv"));

    // a broken bundle is rejected with exit 1
    testutil::write_file(dir.path() / "bad-stations.csv", "station_id,name,min_transfer_min\n");
    const std::string bad = out + "/bad";
    fs::create_directories(bad);
    fs::copy_file(dir.path() / "bad-stations.csv", fs::path(bad) / "stations.csv");
    testutil::write_file(fs::path(bad) / "segments.csv",
                         "train_id,category,from_station,dep_min,to_station,arr_min\n"
                         "T1,other,A,10,B,5\n");
    CHECK(run_cli("ingest --bundle " + bad + " --out-dir " + out, log) == 1);
}

TEST_CASE("ingest converts a GTFS subset to a native bundle") {
    testutil::TempDir dir("cli-gtfs");
    const fs::path log = dir.path() / "log.txt";
    testutil::write_file(dir.path() / "stops.txt", "stop_id,stop_name\nS1,First\nS2,Second\n");
    testutil::write_file(dir.path() / "trips.txt", "trip_id,route_id\nTR1,IC 5\n");
    testutil::write_file(dir.path() / "stop_times.txt",
                         "trip_id,stop_sequence,arrival_time,departure_time,stop_id\n"
                         "TR1,1,08:00:00,08:05:00,S1\n"
                         "TR1,2,09:00:00,09:02:00,S2\n");
    CHECK(run_cli("ingest --gtfs --bundle " + dir.str() + " --out-dir " + dir.str() + "/native",
                  log) == 0);
    const std::string segments = slurp(dir.path() / "native" / "bundle" / "segments.csv");
    CHECK(segments.find("TR1,long_distance,S1,485,S2,540") != std::string::npos);
}

TEST_CASE("report without a prior sweep names the missing artifact") {
    testutil::TempDir dir("cli-missing");
    const fs::path log = dir.path() / "log.txt";
    const std::string out = dir.str();
    REQUIRE(run_cli("generate --grid 6x6 --lines 6 --routes 40 --seed 2 --out-dir " + out, log) == 0);
    REQUIRE(run_cli("sync --bundle " + out + "/bundle --window 0 --out-dir " + out, log) == 0);
    CHECK(run_cli("report --bundle " + out + "/bundle --out-dir " + out, log) == 1);
    const std::string message = slurp(log);
    CHECK(message.find("sweep.csv") != std::string::npos);
}

TEST_CASE("sync profile of a planted-band bundle peaks inside the band") {
    testutil::TempDir dir("cli-band");
    const fs::path log = dir.path() / "log.txt";
    const std::string out = dir.str();
    REQUIRE(run_cli("generate --grid 12x12 --lines 24 --periods 30,60 --band 81:170 --seed 2 "
                    "--out-dir " + out,
                    log) == 0);
    REQUIRE(run_cli("sync --bundle " + out + "/bundle --window 40 --out-dir " + out, log) == 0);

    // band rank interval from the records, peak from the profile
    std::ifstream sync_csv(dir.path() / "sync.csv");
    std::string line;
    int band_lo = 1 << 30, band_hi = -1;
    std::getline(sync_csv, line);  // config comment
    std::getline(sync_csv, line);  // header
    while (std::getline(sync_csv, line)) {
        int rank, t_k;
        char station[32];
        if (std::sscanf(line.c_str(), "%31[^,],%d,%d", station, &rank, &t_k) == 3 && t_k > 80 &&
            t_k <= 170) {
            band_lo = std::min(band_lo, rank);
            band_hi = std::max(band_hi, rank);
        }
    }
    REQUIRE(band_hi >= band_lo);

    std::ifstream profile_csv(dir.path() / "sync_profile.csv");
    std::getline(profile_csv, line);
    std::getline(profile_csv, line);
    int peak_rank = -1;
    double peak = -1e9;
    while (std::getline(profile_csv, line)) {
        int rank;
        double value;
        if (std::sscanf(line.c_str(), "%d,%lf", &rank, &value) == 2 && value > peak) {
            peak = value;
            peak_rank = rank;
        }
    }
    CHECK(peak_rank >= band_lo);
    CHECK(peak_rank <= band_hi);
}

TEST_CASE("unknown flags fail parsing") {
    testutil::TempDir dir("cli-badflag");
    CHECK(run_cli("sync --no-such-flag", dir.path() / "log.txt") != 0);
}

TEST_CASE("supercritical avalanche exits with the guard code") {
    testutil::TempDir dir("cli-guard");
    CHECK(run_cli("avalanche --p-trans 1.0 --m 1.0 --steps 2000 --seeds 1 --out-dir " + dir.str(),
                  dir.path() / "log.txt") == 2);
}

TEST_CASE("avalanche compare writes paired means") {
    testutil::TempDir dir("cli-compare");
    const fs::path log = dir.path() / "log.txt";
    CHECK(run_cli("avalanche --driver compare --seeds 3 --steps 5000 --out-dir " + dir.str(),
                  log) == 0);
    CHECK(fs::exists(dir.path() / "avalanche_compare.csv"));
    const std::string content = slurp(dir.path() / "avalanche_compare.csv");
    CHECK(content.find("periodic_mean") != std::string::npos);
}

TEST_CASE("json format replaces csv artifacts") {
    testutil::TempDir dir("cli-json");
    const fs::path log = dir.path() / "log.txt";
    const std::string out = dir.str();
    REQUIRE(run_cli("generate --grid 6x6 --lines 6 --seed 4 --out-dir " + out, log) == 0);
    CHECK(run_cli("sync --bundle " + out + "/bundle --window 0 --format json --out-dir " + out,
                  log) == 0);
    CHECK(fs::exists(dir.path() / "sync.json"));
    CHECK_FALSE(fs::exists(dir.path() / "sync.csv"));
    const std::string content = slurp(dir.path() / "sync.json");
    CHECK(content.find("\"columns\"") != std::string::npos);
    CHECK(content.find("sigma_star") != std::string::npos);
}

TEST_CASE("config file values apply and flags override them") {
    testutil::TempDir dir("cli-config");
    const fs::path log = dir.path() / "log.txt";
    const std::string out = dir.str();
    testutil::write_file(dir.path() / "config.json", R"({"tau": 60, "null_runs": 13})");
    REQUIRE(run_cli("generate --grid 6x6 --lines 6 --seed 4 --out-dir " + out, log) == 0);

    CHECK(run_cli("sync --bundle " + out + "/bundle --window 0 --config " +
                      (dir.path() / "config.json").string() + " --out-dir " + out,
                  log) == 0);
    std::string header = slurp(dir.path() / "sync.csv");
    CHECK(header.find("\"tau\":60") != std::string::npos);
    CHECK(header.find("\"null_runs\":13") != std::string::npos);

    CHECK(run_cli("sync --bundle " + out + "/bundle --window 0 --tau 120 --config " +
                      (dir.path() / "config.json").string() + " --out-dir " + out,
                  log) == 0);
    header = slurp(dir.path() / "sync.csv");
    CHECK(header.find("\"tau\":120") != std::string::npos);  // flag wins
    CHECK(header.find("\"null_runs\":13") != std::string::npos);
}

TEST_CASE("identical invocations are byte-identical across thread counts") {
    testutil::TempDir dir("cli-det");
    const fs::path log = dir.path() / "log.txt";
    const std::string out1 = dir.str() + "/t1";
    const std::string out2 = dir.str() + "/t2";
    for (const auto& [out, threads] : {std::pair{out1, "1"}, std::pair{out2, "8"}}) {
        REQUIRE(run_cli("generate --grid 6x6 --lines 8 --routes 80 --seed 12 --threads " +
                            std::string(threads) + " --out-dir " + out,
                        log) == 0);
        REQUIRE(run_cli("sync --bundle " + out + "/bundle --window 0 --threads " +
                            std::string(threads) + " --out-dir " + out,
                        log) == 0);
        REQUIRE(run_cli("sweep --bundle " + out + "/bundle --threads " + std::string(threads) +
                            " --out-dir " + out,
                        log) == 0);
    }
    for (const char* name : {"sync.csv", "sync_profile.csv", "sweep.csv"}) {
        CHECK(slurp(fs::path(out1) / name) == slurp(fs::path(out2) / name));
    }
}
