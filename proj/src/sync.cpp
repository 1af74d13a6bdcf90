#include "railsync/sync.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "railsync/csv.hpp"
#include "railsync/parallel.hpp"
#include "railsync/rng.hpp"

namespace railsync::sync {

PhaseSeries to_phases(const EventList& events, Minutes tau) {
    if (tau <= 0) throw TimetableError("to_phases: period must be positive");
    if (events.events.empty()) throw TimetableError("to_phases: empty event list");
    PhaseSeries ps;
    ps.station = events.station;
    ps.period = tau;
    ps.phases.reserve(events.events.size());
    for (const Event& e : events.events) {
        const Minutes r = ((e.time % tau) + tau) % tau;
        ps.phases.push_back(2.0 * std::numbers::pi * static_cast<double>(r) / tau);
    }
    return ps;
}

std::vector<double> phases_from_times(std::span<const double> times, double tau) {
    std::vector<double> phases;
    phases.reserve(times.size());
    for (double t : times) {
        double r = std::fmod(t, tau);
        if (r < 0) r += tau;
        phases.push_back(2.0 * std::numbers::pi * r / tau);
    }
    return phases;
}

double sync_index(std::span<const double> phases) {
    if (phases.empty()) throw TimetableError("sync_index: empty phase series");
    double re = 0, im = 0;
    for (double phi : phases) {
        re += std::cos(phi);
        im += std::sin(phi);
    }
    const double n = static_cast<double>(phases.size());
    return std::sqrt(re * re + im * im) / n;
}

double null_baseline(int t_k, Minutes tau, Minutes day_length, int n_runs, std::uint64_t seed) {
    if (t_k < 1) throw TimetableError("null_baseline: need at least one event");
    if (n_runs < 1) throw TimetableError("null_baseline: need at least one run");
    auto rng = make_engine(seed);
    std::uniform_real_distribution<double> uniform(0.0, static_cast<double>(day_length));
    const double scale = 2.0 * std::numbers::pi / static_cast<double>(tau);
    double acc = 0;
    for (int r = 0; r < n_runs; ++r) {
        double re = 0, im = 0;
        for (int j = 0; j < t_k; ++j) {
            double rem = std::fmod(uniform(rng), static_cast<double>(tau));
            const double phi = rem * scale;
            re += std::cos(phi);
            im += std::sin(phi);
        }
        acc += std::sqrt(re * re + im * im) / t_k;
    }
    return acc / n_runs;
}

std::vector<SyncRecord> reduced_sync(const Timetable& tt, const SyncParams& params,
                                     std::uint64_t seed, unsigned threads) {
    const auto events = station_events(tt);
    std::vector<const EventList*> active;
    for (const auto& [id, list] : events)
        if (!list.events.empty()) active.push_back(&list);

    std::map<std::string, int> sizes;
    for (const EventList* list : active) sizes[list->station] = list->size();
    const auto ranked = station_rank(sizes);
    std::map<std::string, int> rank_of;
    for (std::size_t i = 0; i < ranked.size(); ++i) rank_of[ranked[i]] = static_cast<int>(i) + 1;

    std::vector<SyncRecord> records(active.size());
    parallel_for(active.size(), threads, [&](std::size_t i) {
        const EventList& list = *active[i];
        SyncRecord rec;
        rec.station = list.station;
        rec.t_k = list.size();
        rec.sigma = sync_index(to_phases(list, params.tau).phases);
        rec.sigma_null = null_baseline(rec.t_k, params.tau, params.day_length, params.null_runs,
                                       derive_seed(seed, list.station));
        rec.sigma_star = rec.sigma - rec.sigma_null;
        rec.rank = rank_of.at(list.station);
        records[i] = std::move(rec);
    });
    std::sort(records.begin(), records.end(),
              [](const SyncRecord& a, const SyncRecord& b) { return a.rank < b.rank; });
    return records;
}

RankProfile rank_window_average(std::span<const std::pair<int, double>> values, int window) {
    if (window < 1) throw TimetableError("rank_window_average: window must be positive");
    if (window > static_cast<int>(values.size()))
        throw TimetableError("rank_window_average: window " + std::to_string(window) +
                             " larger than series of length " + std::to_string(values.size()));
    RankProfile profile;
    profile.window = window;
    const int n = static_cast<int>(values.size());
    for (int start = 0; start + window <= n; ++start) {
        double sum = 0;
        for (int i = start; i < start + window; ++i) sum += values[i].second;
        profile.points.emplace_back(values[start + window / 2].first, sum / window);
    }
    return profile;
}

CategoryMeans category_means(const std::vector<SyncRecord>& records, int low, int high) {
    double sums[3] = {0, 0, 0};
    long long counts[3] = {0, 0, 0};
    for (const auto& r : records) {
        const int cls = r.t_k <= low ? 0 : (r.t_k <= high ? 1 : 2);
        sums[cls] += r.sigma_star;
        ++counts[cls];
    }
    CategoryMeans m;
    if (counts[0]) m.small = sums[0] / counts[0];
    if (counts[1]) m.medium = sums[1] / counts[1];
    if (counts[2]) m.large = sums[2] / counts[2];
    return m;
}

void write_sync_csv(const std::vector<SyncRecord>& records, const std::string& path,
                    const std::string& config_comment) {
    std::ofstream out(path);
    if (!out) throw TimetableError("cannot write " + path);
    if (!config_comment.empty()) out << "# " << config_comment << "\n";
    out << "station_id,rank,t_k,sigma,sigma_null,sigma_star\n";
    for (const auto& r : records)
        out << csv_escape(r.station) << ',' << r.rank << ',' << r.t_k << ','
            << format_double(r.sigma) << ',' << format_double(r.sigma_null) << ','
            << format_double(r.sigma_star) << '\n';
}

void write_profile_csv(const RankProfile& profile, const std::string& path,
                       const std::string& config_comment) {
    std::ofstream out(path);
    if (!out) throw TimetableError("cannot write " + path);
    if (!config_comment.empty()) out << "# " << config_comment << "\n";
    out << "center_rank,sigma_star_avg\n";
    for (const auto& [rank, value] : profile.points)
        out << rank << ',' << format_double(value) << '\n';
}

std::vector<SyncRecord> read_sync_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    const int c_station = t.column("station_id");
    const int c_rank = t.column("rank");
    const int c_tk = t.column("t_k");
    const int c_sigma = t.column("sigma");
    const int c_null = t.column("sigma_null");
    const int c_star = t.column("sigma_star");
    std::vector<SyncRecord> records;
    records.reserve(t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        SyncRecord rec;
        rec.station = t.rows[r][c_station];
        rec.rank = parse_int_field(t, r, c_rank);
        rec.t_k = parse_int_field(t, r, c_tk);
        rec.sigma = parse_double_field(t, r, c_sigma);
        rec.sigma_null = parse_double_field(t, r, c_null);
        rec.sigma_star = parse_double_field(t, r, c_star);
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace railsync::sync
