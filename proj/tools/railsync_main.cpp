// railsync: timetable synchronization, delay propagation and avalanche
// analytics. Subcommands: ingest, generate, sync, sweep, avalanche, report.
//
// Exit codes: 0 success, 1 validation or usage error, 2 runtime guard trip
// (supercritical avalanche).

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "railsync/avalanche.hpp"
#include "railsync/csv.hpp"
#include "railsync/depgraph.hpp"
#include "railsync/io.hpp"
#include "railsync/parallel.hpp"
#include "railsync/report.hpp"
#include "railsync/rng.hpp"
#include "railsync/stats.hpp"
#include "railsync/sync.hpp"
#include "railsync/synthetic.hpp"
#include "railsync/timetable.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace railsync;

namespace {

struct RunConfig {
    std::uint64_t seed = 1;
    unsigned threads = 0;  // 0 = all cores
    std::string out_dir = ".";
    std::string format = "csv";

    Minutes tau = 120;
    int null_runs = 100;
    int sync_window = 40;
    int joint_window = 26;
    int category_low = 80;
    int category_high = 170;
    std::vector<Minutes> p_values = {5, 30};
    Minutes transfer_window = 120;
    Minutes min_standing = 2;
    Minutes max_delay = 720;
    double catch_up = 0.0;
    depgraph::WaitingPolicy policy;

    avalanche::AvaParams ava;
    int ava_n = 70;
    int ava_edges = 240;
    long long ava_steps = 100000;
    int ava_seeds = 100;
    bool ava_compare = false;

    SyntheticParams gen;
};

unsigned effective_threads(const RunConfig& cfg) {
    return cfg.threads == 0 ? default_thread_count() : cfg.threads;
}

TrainCategory parse_category(const std::string& s) {
    auto c = category_from_string(s);
    if (!c) throw std::invalid_argument("unknown train category '" + s + "'");
    return *c;
}

void load_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
    json j;
    in >> j;
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("tau")) cfg.tau = j["tau"].get<int>();
    if (j.contains("null_runs")) cfg.null_runs = j["null_runs"].get<int>();
    if (j.contains("sync_window")) cfg.sync_window = j["sync_window"].get<int>();
    if (j.contains("joint_window")) cfg.joint_window = j["joint_window"].get<int>();
    if (j.contains("category_boundaries")) {
        cfg.category_low = j["category_boundaries"].at(0).get<int>();
        cfg.category_high = j["category_boundaries"].at(1).get<int>();
    }
    if (j.contains("p_values")) cfg.p_values = j["p_values"].get<std::vector<Minutes>>();
    if (j.contains("transfer_window")) cfg.transfer_window = j["transfer_window"].get<int>();
    if (j.contains("min_standing")) cfg.min_standing = j["min_standing"].get<int>();
    if (j.contains("max_delay")) cfg.max_delay = j["max_delay"].get<int>();
    if (j.contains("catch_up")) cfg.catch_up = j["catch_up"].get<double>();
    if (j.contains("policy")) {
        const json& p = j["policy"];
        if (p.contains("rule"))
            cfg.policy.rule = p["rule"].get<std::string>() == "conditional"
                                  ? depgraph::WaitingPolicy::Rule::conditional
                                  : depgraph::WaitingPolicy::Rule::capped;
        if (p.contains("default_max_wait"))
            cfg.policy.default_max_wait = p["default_max_wait"].get<int>();
        if (p.contains("pairs"))
            for (const auto& e : p["pairs"])
                cfg.policy.pair_max_wait[{parse_category(e.at("feeder").get<std::string>()),
                                          parse_category(e.at("connecting").get<std::string>())}] =
                    e.at("max_wait").get<int>();
    }
    if (j.contains("avalanche")) {
        const json& a = j["avalanche"];
        if (a.contains("n")) cfg.ava_n = a["n"].get<int>();
        if (a.contains("edges")) cfg.ava_edges = a["edges"].get<int>();
        if (a.contains("period")) cfg.ava.driver_period = a["period"].get<int>();
        if (a.contains("threshold")) cfg.ava.threshold = a["threshold"].get<double>();
        if (a.contains("m")) cfg.ava.amplification = a["m"].get<double>();
        if (a.contains("p_trans")) cfg.ava.p_trans = a["p_trans"].get<double>();
        if (a.contains("unit")) cfg.ava.unit = a["unit"].get<double>();
        if (a.contains("max_topplings")) cfg.ava.max_topplings = a["max_topplings"].get<long long>();
        if (a.contains("steps")) cfg.ava_steps = a["steps"].get<long long>();
        if (a.contains("seeds")) cfg.ava_seeds = a["seeds"].get<int>();
        if (a.contains("mode"))
            cfg.ava.mode = a["mode"].get<std::string>() == "concurrent"
                               ? avalanche::InsertionMode::concurrent
                               : avalanche::InsertionMode::instantaneous;
        if (a.contains("driver")) {
            const std::string d = a["driver"].get<std::string>();
            cfg.ava_compare = d == "compare";
            if (!cfg.ava_compare)
                cfg.ava.driver = d == "stochastic" ? avalanche::DriverKind::stochastic
                                                   : avalanche::DriverKind::periodic;
        }
    }
    if (j.contains("generate")) {
        const json& g = j["generate"];
        if (g.contains("grid")) {
            cfg.gen.grid_width = g["grid"].at(0).get<int>();
            cfg.gen.grid_height = g["grid"].at(1).get<int>();
        }
        if (g.contains("lines")) cfg.gen.line_count = g["lines"].get<int>();
        if (g.contains("periods")) cfg.gen.allowed_periods = g["periods"].get<std::vector<int>>();
        if (g.contains("line_periods")) cfg.gen.line_periods = g["line_periods"].get<std::vector<int>>();
        if (g.contains("line_phases")) cfg.gen.line_phases = g["line_phases"].get<std::vector<int>>();
        if (g.contains("hop")) cfg.gen.hop_minutes = g["hop"].get<int>();
        if (g.contains("hop_spread")) cfg.gen.hop_spread = g["hop_spread"].get<int>();
        if (g.contains("transfer_prob"))
            cfg.gen.route_transfer_prob = g["transfer_prob"].get<double>();
        if (g.contains("dwell")) cfg.gen.dwell_minutes = g["dwell"].get<int>();
        if (g.contains("span")) cfg.gen.service_span = g["span"].get<int>();
        if (g.contains("min_transfer")) cfg.gen.min_transfer = g["min_transfer"].get<int>();
        if (g.contains("routes")) cfg.gen.route_count = g["routes"].get<int>();
        if (g.contains("band") && !g["band"].is_null()) {
            SyncBand band;
            const json& b = g["band"];
            if (b.contains("min_events")) band.min_events = b["min_events"].get<int>();
            if (b.contains("max_events")) band.max_events = b["max_events"].get<int>();
            if (b.contains("snap_period")) band.snap_period = b["snap_period"].get<int>();
            if (b.contains("snap_offset")) band.snap_offset = b["snap_offset"].get<int>();
            cfg.gen.band = band;
        }
    }
}

// Full effective configuration echoed into every artifact. Thread count and
// paths are execution details and stay out so reruns are byte-identical.
std::string config_echo(const RunConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;
    j["tau"] = cfg.tau;
    j["null_runs"] = cfg.null_runs;
    j["sync_window"] = cfg.sync_window;
    j["joint_window"] = cfg.joint_window;
    j["category_boundaries"] = {cfg.category_low, cfg.category_high};
    j["p_values"] = cfg.p_values;
    j["transfer_window"] = cfg.transfer_window;
    j["min_standing"] = cfg.min_standing;
    j["max_delay"] = cfg.max_delay;
    j["catch_up"] = cfg.catch_up;
    json policy;
    policy["rule"] =
        cfg.policy.rule == depgraph::WaitingPolicy::Rule::capped ? "capped" : "conditional";
    policy["default_max_wait"] = cfg.policy.default_max_wait;
    json pairs = json::array();
    for (const auto& [key, wait] : cfg.policy.pair_max_wait)
        pairs.push_back({{"feeder", to_string(key.first)},
                         {"connecting", to_string(key.second)},
                         {"max_wait", wait}});
    policy["pairs"] = pairs;
    j["policy"] = policy;
    json ava;
    ava["n"] = cfg.ava_n;
    ava["edges"] = cfg.ava_edges;
    ava["period"] = cfg.ava.driver_period;
    ava["threshold"] = cfg.ava.threshold;
    ava["m"] = cfg.ava.amplification;
    ava["p_trans"] = cfg.ava.p_trans;
    ava["unit"] = cfg.ava.unit;
    ava["max_topplings"] = cfg.ava.max_topplings;
    ava["steps"] = cfg.ava_steps;
    ava["seeds"] = cfg.ava_seeds;
    ava["mode"] = cfg.ava.mode == avalanche::InsertionMode::instantaneous ? "instantaneous"
                                                                          : "concurrent";
    ava["driver"] = cfg.ava_compare
                        ? "compare"
                        : (cfg.ava.driver == avalanche::DriverKind::periodic ? "periodic"
                                                                             : "stochastic");
    j["avalanche"] = ava;
    json gen;
    gen["grid"] = {cfg.gen.grid_width, cfg.gen.grid_height};
    gen["lines"] = cfg.gen.line_count;
    gen["periods"] = cfg.gen.allowed_periods;
    gen["hop"] = cfg.gen.hop_minutes;
    gen["hop_spread"] = cfg.gen.hop_spread;
    gen["transfer_prob"] = cfg.gen.route_transfer_prob;
    gen["dwell"] = cfg.gen.dwell_minutes;
    gen["span"] = cfg.gen.service_span;
    gen["min_transfer"] = cfg.gen.min_transfer;
    gen["routes"] = cfg.gen.route_count;
    if (cfg.gen.band)
        gen["band"] = {{"min_events", cfg.gen.band->min_events},
                       {"max_events", cfg.gen.band->max_events},
                       {"snap_period", cfg.gen.band->snap_period},
                       {"snap_offset", cfg.gen.band->snap_offset}};
    else
        gen["band"] = nullptr;
    j["generate"] = gen;
    return "config: " + j.dump();
}

// --format json rewrites a CSV artifact as {config, columns, rows}.
void finalize_artifact(const RunConfig& cfg, const std::string& csv_path) {
    if (cfg.format != "json") return;
    const CsvTable t = read_csv(csv_path);
    json j;
    j["config"] = json::array();
    for (const auto& c : t.comments) j["config"].push_back(c);
    j["columns"] = t.header;
    j["rows"] = json::array();
    for (const auto& row : t.rows) j["rows"].push_back(row);
    fs::path out = csv_path;
    out.replace_extension(".json");
    std::ofstream f(out);
    f << j.dump(2) << "\n";
    fs::remove(csv_path);
}

void require_artifact(const std::string& path, const std::string& hint) {
    if (!fs::exists(path))
        throw std::invalid_argument("missing prerequisite artifact '" + path + "' (" + hint + ")");
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.out_dir);
    return (fs::path(cfg.out_dir) / name).string();
}

int cmd_ingest(const RunConfig& cfg, const std::string& input, bool gtfs) {
    const Timetable tt = gtfs ? import_gtfs_subset(input)
                              : parse_timetable(input, cfg.transfer_window);
    const std::string bundle = out_path(cfg, "bundle");
    serialize_timetable(tt, bundle, config_echo(cfg));
    long long segments = 0;
    for (const auto& [id, run] : tt.runs) segments += static_cast<long long>(run.segments.size());
    std::printf("ingested %zu stations, %zu trains, %lld segments, %zu routes -> %s\n",
                tt.stations.size(), tt.runs.size(), segments, tt.routes.size(), bundle.c_str());
    return 0;
}

int cmd_generate(const RunConfig& cfg) {
    SyntheticParams params = cfg.gen;
    params.transfer_window = cfg.transfer_window;
    const Timetable tt = generate_synthetic(params, cfg.seed);
    const std::string bundle = out_path(cfg, "bundle");
    serialize_timetable(tt, bundle, config_echo(cfg));
    std::printf("generated %zu stations, %zu trains, %zu routes -> %s\n", tt.stations.size(),
                tt.runs.size(), tt.routes.size(), bundle.c_str());
    return 0;
}

int cmd_sync(const RunConfig& cfg, const std::string& bundle) {
    const Timetable tt = parse_timetable(bundle, cfg.transfer_window);
    sync::SyncParams params;
    params.tau = cfg.tau;
    params.null_runs = cfg.null_runs;
    params.day_length = tt.day_length;
    const auto records =
        sync::reduced_sync(tt, params, derive_seed(cfg.seed, "sync"), effective_threads(cfg));
    const std::string sync_path = out_path(cfg, "sync.csv");
    sync::write_sync_csv(records, sync_path, config_echo(cfg));

    int window = cfg.sync_window;
    if (window == 0) window = static_cast<int>(records.size());
    const auto profile = sync::rank_window_average(records, window);
    const std::string profile_path = out_path(cfg, "sync_profile.csv");
    sync::write_profile_csv(profile, profile_path, config_echo(cfg));

    const auto means = sync::category_means(records, cfg.category_low, cfg.category_high);
    const std::string cat_path = out_path(cfg, "sync_categories.csv");
    {
        std::ofstream out(cat_path);
        out << "# " << config_echo(cfg) << "\n";
        out << "category,stations,sigma_star_mean\n";
        const auto emit = [&](const char* name, const std::optional<double>& mean, long long n) {
            if (mean) out << name << ',' << n << ',' << format_double(*mean) << '\n';
        };
        long long small = 0, medium = 0, large = 0;
        for (const auto& r : records) {
            if (r.t_k <= cfg.category_low) ++small;
            else if (r.t_k <= cfg.category_high) ++medium;
            else ++large;
        }
        emit("small", means.small, small);
        emit("medium", means.medium, medium);
        emit("large", means.large, large);
    }
    finalize_artifact(cfg, sync_path);
    finalize_artifact(cfg, profile_path);
    finalize_artifact(cfg, cat_path);
    std::printf("sync analysis for %zu stations -> %s\n", records.size(), cfg.out_dir.c_str());
    return 0;
}

int cmd_sweep(const RunConfig& cfg, const std::string& bundle) {
    const Timetable tt = parse_timetable(bundle, cfg.transfer_window);
    if (tt.routes.empty())
        throw std::invalid_argument("sweep needs passenger routes (routes.csv) in the bundle");
    const auto transfers = derive_transfers(tt, cfg.transfer_window);
    depgraph::BuildOptions options;
    options.min_standing = cfg.min_standing;
    options.catch_up = cfg.catch_up;
    const auto g = depgraph::build_depgraph(tt, transfers, cfg.policy, options);
    depgraph::SweepParams params;
    params.p_values = cfg.p_values;
    params.max_delay = cfg.max_delay;
    params.threads = effective_threads(cfg);
    const auto result = depgraph::secondary_delay_sweep(g, tt, params);
    const std::string path = out_path(cfg, "sweep.csv");
    depgraph::write_sweep_csv(result, path, config_echo(cfg));
    finalize_artifact(cfg, path);
    std::printf("sweep over %zu cells -> %s\n", result.cells.size(), path.c_str());
    return 0;
}

int cmd_avalanche(const RunConfig& cfg) {
    const auto g = avalanche::random_graph(cfg.ava_n, cfg.ava_edges,
                                           derive_seed(cfg.seed, "ava-graph"));
    const std::string results_path = out_path(cfg, "avalanche.csv");
    std::ofstream out(results_path);
    out << "# " << config_echo(cfg) << "\n";
    out << "# params: " << avalanche::params_json(g, cfg.ava, cfg.ava_steps) << "\n";
    out << "driver,seed,avalanches,mean_length,tail_slope,tail_r2\n";

    int exit_code = 0;
    std::vector<avalanche::AvaRun> runs;
    if (!cfg.ava_compare) {
        for (int s = 0; s < cfg.ava_seeds; ++s) {
            const auto r = avalanche::run(g, cfg.ava, cfg.ava_steps,
                                          derive_seed(derive_seed(cfg.seed, "ava-run"), s));
            if (r.aborted) {
                std::fprintf(stderr,
                             "avalanche guard tripped at seed %d: supercritical regime "
                             "(more than %lld topplings in one cascade)\n",
                             s, cfg.ava.max_topplings);
                exit_code = 2;
                break;
            }
            const auto stats = avalanche_stats(std::span(&r, 1));
            out << (cfg.ava.driver == avalanche::DriverKind::periodic ? "periodic" : "stochastic")
                << ',' << s << ',' << (stats ? stats->avalanche_count : 0) << ','
                << (stats ? format_double(stats->mean_length) : "") << ','
                << (stats && stats->tail_slope ? format_double(*stats->tail_slope) : "") << ','
                << (stats && stats->tail_r2 ? format_double(*stats->tail_r2) : "") << '\n';
            runs.push_back(r);
        }
        const auto total = avalanche::avalanche_stats(runs);
        if (total) {
            const std::string hist_path = out_path(cfg, "avalanche_hist.csv");
            std::ofstream hist(hist_path);
            hist << "# " << config_echo(cfg) << "\n";
            hist << "# params: " << avalanche::params_json(g, cfg.ava, cfg.ava_steps) << "\n";
            hist << "length,count\n";
            for (const auto& [len, count] : total->histogram) hist << len << ',' << count << '\n';
            hist.close();
            finalize_artifact(cfg, hist_path);
        }
    } else {
        const auto cmp = avalanche::compare_drivers(g, cfg.ava, cfg.ava_steps, cfg.ava_seeds,
                                                    derive_seed(cfg.seed, "ava-cmp"),
                                                    effective_threads(cfg));
        for (int s = 0; s < cfg.ava_seeds; ++s) {
            out << "periodic," << s << ",," << format_double(cmp.per_seed[s].first) << ",,\n";
            out << "stochastic," << s << ",," << format_double(cmp.per_seed[s].second) << ",,\n";
        }
        const std::string cmp_path = out_path(cfg, "avalanche_compare.csv");
        std::ofstream c(cmp_path);
        c << "# " << config_echo(cfg) << "\n";
        c << "periodic_mean,stochastic_mean,seeds\n";
        c << format_double(cmp.periodic_mean) << ',' << format_double(cmp.stochastic_mean) << ','
          << cfg.ava_seeds << '\n';
        c.close();
        finalize_artifact(cfg, cmp_path);
    }
    out.close();
    finalize_artifact(cfg, results_path);
    if (exit_code == 0) std::printf("avalanche results -> %s\n", results_path.c_str());
    return exit_code;
}

int cmd_report(const RunConfig& cfg, const std::string& bundle, const std::string& sync_path,
               const std::string& sweep_path, Minutes quadrant_p, bool smoothed_quadrants) {
    require_artifact(sync_path, "run `railsync sync` first");
    require_artifact(sweep_path, "run `railsync sweep` first");
    const Timetable tt = parse_timetable(bundle, cfg.transfer_window);
    const auto sync_records = sync::read_sync_csv(sync_path);
    const auto sweep = depgraph::read_sweep_csv(sweep_path);

    const auto transfers = derive_transfers(tt, cfg.transfer_window);
    const auto buffering = buffering_times(transfers);
    const auto slack = buffering_slack(tt, transfers);
    std::map<std::pair<std::string, Minutes>, double> s_mean;
    std::set<Minutes> p_seen;
    for (const auto& cell : sweep.cells) {
        s_mean[{cell.station, cell.p}] = cell.s_mean();
        p_seen.insert(cell.p);
    }
    const std::vector<Minutes> p_values(p_seen.begin(), p_seen.end());
    if (p_values.empty()) throw std::invalid_argument("sweep artifact contains no delay values");
    const Minutes p = p_seen.count(quadrant_p) ? quadrant_p : p_values.front();

    const auto metrics =
        report::assemble_metrics(tt, sync_records, buffering, slack, p_values, s_mean);
    if (metrics.empty())
        throw std::invalid_argument("no station has complete b, s(p) and sigma* metrics");

    const int window = std::min<int>(cfg.joint_window, static_cast<int>(metrics.size()));
    const auto quadrants =
        smoothed_quadrants
            ? report::quadrant_classify(report::smooth_metrics(metrics, p, window), p)
            : report::quadrant_classify(metrics, p);
    const auto sigma_means = report::sync_by_quadrant(metrics, quadrants);
    const auto profile = report::joint_profile(metrics, p, window);

    const std::string metrics_path = out_path(cfg, "metrics.csv");
    report::write_metrics_csv(metrics, quadrants, p_values, metrics_path, config_echo(cfg));
    const std::string profile_path = out_path(cfg, "profile.csv");
    report::write_joint_profile_csv(profile, profile_path, config_echo(cfg));
    const std::string quadrants_path = out_path(cfg, "quadrants.csv");
    report::write_quadrants_csv(quadrants, sigma_means, quadrants_path, config_echo(cfg));

    if (p_values.size() >= 2) {
        std::vector<double> x, y;
        std::vector<const report::StationMetrics*> sorted;
        for (const auto& m : metrics) sorted.push_back(&m);
        std::sort(sorted.begin(), sorted.end(),
                  [](const auto* a, const auto* b) { return a->rank < b->rank; });
        const Minutes p1 = p_values[0];
        const Minutes p2 = p_values[1];
        for (const auto* m : sorted) {
            x.push_back(m->s.at(p1));
            y.push_back(m->s.at(p2));
        }
        const auto corr =
            report::correlate(x, y, static_cast<double>(p2) / static_cast<double>(p1));
        const std::string corr_path = out_path(cfg, "correlation.csv");
        std::ofstream out(corr_path);
        out << "# " << config_echo(cfg) << "\n";
        out << "# pearson_r: " << (corr.r ? format_double(*corr.r) : "undefined") << "\n";
        out << "station_id,rank,s_p" << p1 << ",s_p" << p2 << ",y_lin\n";
        for (std::size_t i = 0; i < sorted.size(); ++i)
            out << csv_escape(sorted[i]->station) << ',' << sorted[i]->rank << ','
                << format_double(corr.pairs[i][0]) << ',' << format_double(corr.pairs[i][1])
                << ',' << format_double(corr.pairs[i][2]) << '\n';
        out.close();
        finalize_artifact(cfg, corr_path);
    }

    finalize_artifact(cfg, metrics_path);
    finalize_artifact(cfg, profile_path);
    finalize_artifact(cfg, quadrants_path);
    std::printf("report for %zu stations -> %s\n", metrics.size(), cfg.out_dir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    CLI::App app{"railsync timetable analytics"};
    app.require_subcommand(1);

    std::string config_file;
    app.add_option("--config", config_file, "JSON config file (flags override it)");
    auto* seed_opt = app.add_option("--seed", cfg.seed, "master seed");
    auto* threads_opt = app.add_option("--threads", cfg.threads, "worker threads (0 = all cores)");
    auto* out_opt = app.add_option("--out-dir", cfg.out_dir, "output directory");
    auto* format_opt =
        app.add_option("--format", cfg.format, "artifact format")->check(CLI::IsMember({"csv", "json"}));

    std::string input_bundle;
    std::string sync_path, sweep_path;
    bool gtfs = false;
    Minutes quadrant_p = 5;

    auto* ingest = app.add_subcommand("ingest", "validate and normalize a timetable bundle");
    ingest->add_option("--bundle", input_bundle, "input directory")->required();
    ingest->add_flag("--gtfs", gtfs, "input is a GTFS subset (stops/trips/stop_times)");

    auto* generate = app.add_subcommand("generate", "write a synthetic timetable bundle");
    auto* g_grid = generate->add_option("--grid", "grid as WxH");
    auto* g_lines = generate->add_option("--lines", cfg.gen.line_count, "line count");
    auto* g_periods = generate->add_option("--periods", "allowed line periods, comma separated");
    auto* g_hop = generate->add_option("--hop", cfg.gen.hop_minutes, "travel minutes per hop");
    auto* g_spread = generate->add_option("--hop-spread", cfg.gen.hop_spread,
                                          "per-line hop variation (+- minutes)");
    auto* g_tp = generate->add_option("--transfer-prob", cfg.gen.route_transfer_prob,
                                      "chance a route continues past each leg");
    auto* g_dwell = generate->add_option("--dwell", cfg.gen.dwell_minutes, "dwell minutes");
    auto* g_span = generate->add_option("--span", cfg.gen.service_span, "service span minutes");
    auto* g_mt = generate->add_option("--min-transfer", cfg.gen.min_transfer, "station interchange time");
    auto* g_routes = generate->add_option("--routes", cfg.gen.route_count, "passenger routes");
    auto* g_band = generate->add_option("--band", "planted sync band as LO:HI[:OFFSET[:PERIOD]]");

    auto* syncc = app.add_subcommand("sync", "phase synchronization analysis");
    syncc->add_option("--bundle", input_bundle, "timetable bundle")->required();
    auto* s_tau = syncc->add_option("--tau", cfg.tau, "phase period in minutes");
    auto* s_nr = syncc->add_option("--null-runs", cfg.null_runs, "null model runs per station");
    auto* s_win = syncc->add_option("--window", cfg.sync_window, "rank averaging window (0 = all)");

    auto* sweep = app.add_subcommand("sweep", "exhaustive secondary delay experiment");
    sweep->add_option("--bundle", input_bundle, "timetable bundle")->required();
    auto* w_p = sweep->add_option("--p", "primary delays, comma separated");
    auto* w_wait = sweep->add_option("--max-wait", cfg.policy.default_max_wait, "default waiting time");
    auto* w_rule = sweep->add_option("--wait-rule", "waiting rule")
                       ->check(CLI::IsMember({"capped", "conditional"}));

    auto* ava = app.add_subcommand("avalanche", "delay avalanche model runs");
    auto* a_driver = ava->add_option("--driver", "periodic | stochastic | compare")
                         ->check(CLI::IsMember({"periodic", "stochastic", "compare"}));
    auto* a_period = ava->add_option("--period", cfg.ava.driver_period, "driving period P");
    auto* a_thresh = ava->add_option("--threshold", cfg.ava.threshold, "toppling threshold T");
    auto* a_m = ava->add_option("--m", cfg.ava.amplification, "amplification factor");
    auto* a_p = ava->add_option("--p-trans", cfg.ava.p_trans, "transmission probability");
    auto* a_n = ava->add_option("--n", cfg.ava_n, "node count");
    auto* a_edges = ava->add_option("--edges", cfg.ava_edges, "edge count");
    auto* a_steps = ava->add_option("--steps", cfg.ava_steps, "time steps per run");
    auto* a_seeds = ava->add_option("--seeds", cfg.ava_seeds, "number of runs / paired seeds");
    auto* a_mode = ava->add_option("--mode", "insertion mode")
                       ->check(CLI::IsMember({"instantaneous", "concurrent"}));

    auto* reportc = app.add_subcommand("report", "join sync and sweep outputs");
    reportc->add_option("--bundle", input_bundle, "timetable bundle")->required();
    reportc->add_option("--sync", sync_path, "sync.csv from `railsync sync`");
    reportc->add_option("--sweep", sweep_path, "sweep.csv from `railsync sweep`");
    reportc->add_option("--quadrant-p", quadrant_p, "primary delay for the quadrant split");
    std::string quadrant_mode = "raw";
    reportc->add_option("--quadrant-mode", quadrant_mode, "split raw points or smoothed curves")
        ->check(CLI::IsMember({"raw", "smoothed"}));
    auto* r_joint = reportc->add_option("--joint-window", cfg.joint_window, "smoothing window");

    for (auto* sub : {ingest, generate, syncc, sweep, ava, reportc}) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_file.empty()) {
            // flags win over the config file: reapply any explicitly set flag
            RunConfig flag_values = cfg;
            load_config_file(cfg, config_file);
            if (seed_opt->count()) cfg.seed = flag_values.seed;
            if (threads_opt->count()) cfg.threads = flag_values.threads;
            if (s_tau->count()) cfg.tau = flag_values.tau;
            if (s_nr->count()) cfg.null_runs = flag_values.null_runs;
            if (s_win->count()) cfg.sync_window = flag_values.sync_window;
            if (w_wait->count()) cfg.policy.default_max_wait = flag_values.policy.default_max_wait;
            if (a_period->count()) cfg.ava.driver_period = flag_values.ava.driver_period;
            if (a_thresh->count()) cfg.ava.threshold = flag_values.ava.threshold;
            if (a_m->count()) cfg.ava.amplification = flag_values.ava.amplification;
            if (a_p->count()) cfg.ava.p_trans = flag_values.ava.p_trans;
            if (a_n->count()) cfg.ava_n = flag_values.ava_n;
            if (a_edges->count()) cfg.ava_edges = flag_values.ava_edges;
            if (a_steps->count()) cfg.ava_steps = flag_values.ava_steps;
            if (a_seeds->count()) cfg.ava_seeds = flag_values.ava_seeds;
            if (g_lines->count()) cfg.gen.line_count = flag_values.gen.line_count;
            if (g_hop->count()) cfg.gen.hop_minutes = flag_values.gen.hop_minutes;
            if (g_spread->count()) cfg.gen.hop_spread = flag_values.gen.hop_spread;
            if (g_tp->count()) cfg.gen.route_transfer_prob = flag_values.gen.route_transfer_prob;
            if (g_dwell->count()) cfg.gen.dwell_minutes = flag_values.gen.dwell_minutes;
            if (g_span->count()) cfg.gen.service_span = flag_values.gen.service_span;
            if (g_mt->count()) cfg.gen.min_transfer = flag_values.gen.min_transfer;
            if (g_routes->count()) cfg.gen.route_count = flag_values.gen.route_count;
            if (r_joint->count()) cfg.joint_window = flag_values.joint_window;
        }
        (void)out_opt;
        (void)format_opt;

        if (g_grid->count()) {
            const std::string v = g_grid->as<std::string>();
            const auto x = v.find('x');
            if (x == std::string::npos)
                throw std::invalid_argument("--grid expects WxH, got '" + v + "'");
            cfg.gen.grid_width = std::stoi(v.substr(0, x));
            cfg.gen.grid_height = std::stoi(v.substr(x + 1));
        }
        if (g_periods->count()) {
            cfg.gen.allowed_periods.clear();
            for (const auto& part : g_periods->as<std::vector<std::string>>())
                for (std::stringstream ss(part); ss.good();) {
                    std::string item;
                    std::getline(ss, item, ',');
                    if (!item.empty()) cfg.gen.allowed_periods.push_back(std::stoi(item));
                }
        }
        if (g_band->count()) {
            const std::string v = g_band->as<std::string>();
            SyncBand band;
            if (std::sscanf(v.c_str(), "%d:%d:%d:%d", &band.min_events, &band.max_events,
                            &band.snap_offset, &band.snap_period) < 2)
                throw std::invalid_argument("--band expects LO:HI[:OFFSET[:PERIOD]], got '" + v +
                                            "'");
            cfg.gen.band = band;
        }
        if (w_p->count()) {
            cfg.p_values.clear();
            for (const auto& part : w_p->as<std::vector<std::string>>())
                for (std::stringstream ss(part); ss.good();) {
                    std::string item;
                    std::getline(ss, item, ',');
                    if (!item.empty()) cfg.p_values.push_back(std::stoi(item));
                }
        }
        if (w_rule->count())
            cfg.policy.rule = w_rule->as<std::string>() == "conditional"
                                  ? depgraph::WaitingPolicy::Rule::conditional
                                  : depgraph::WaitingPolicy::Rule::capped;
        if (a_driver->count()) {
            const std::string d = a_driver->as<std::string>();
            cfg.ava_compare = d == "compare";
            if (!cfg.ava_compare)
                cfg.ava.driver = d == "stochastic" ? avalanche::DriverKind::stochastic
                                                   : avalanche::DriverKind::periodic;
        }
        if (a_mode->count())
            cfg.ava.mode = a_mode->as<std::string>() == "concurrent"
                               ? avalanche::InsertionMode::concurrent
                               : avalanche::InsertionMode::instantaneous;

        if (ingest->parsed()) return cmd_ingest(cfg, input_bundle, gtfs);
        if (generate->parsed()) return cmd_generate(cfg);
        if (syncc->parsed()) return cmd_sync(cfg, input_bundle);
        if (sweep->parsed()) return cmd_sweep(cfg, input_bundle);
        if (ava->parsed()) return cmd_avalanche(cfg);
        if (reportc->parsed()) {
            if (sync_path.empty()) sync_path = (fs::path(cfg.out_dir) / "sync.csv").string();
            if (sweep_path.empty()) sweep_path = (fs::path(cfg.out_dir) / "sweep.csv").string();
            return cmd_report(cfg, input_bundle, sync_path, sweep_path, quadrant_p,
                              quadrant_mode == "smoothed");
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
