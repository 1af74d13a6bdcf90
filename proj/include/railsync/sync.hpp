#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "railsync/timetable.hpp"

// Phase-synchronization analysis of station event times: the order parameter
// sigma of the event phases, a random null baseline, and the reduced index
// sigma* = sigma - sigma_null that removes the pure event-count effect.

namespace railsync::sync {

struct PhaseSeries {
    std::string station;
    std::vector<double> phases;  // radians in [0, 2*pi)
    Minutes period = 120;
};

struct SyncRecord {
    std::string station;
    int t_k = 0;
    double sigma = 0.0;
    double sigma_null = 0.0;
    double sigma_star = 0.0;
    int rank = 0;
};

struct RankProfile {
    std::vector<std::pair<int, double>> points;  // (center rank, windowed mean)
    int window = 1;
};

// phi_j = 2*pi * (t_j mod tau) / tau
PhaseSeries to_phases(const EventList& events, Minutes tau);
std::vector<double> phases_from_times(std::span<const double> times, double tau);

// Modulus of the mean unit phasor, in [0, 1].
double sync_index(std::span<const double> phases);

// Mean sigma over n_runs draws of t_k event times uniform on [0, day_length).
double null_baseline(int t_k, Minutes tau, Minutes day_length, int n_runs, std::uint64_t seed);

struct SyncParams {
    Minutes tau = 120;
    int null_runs = 100;
    Minutes day_length = 1440;
};

// One record per station with at least one event; null streams are keyed by
// (seed, station id) so the result is independent of evaluation order.
std::vector<SyncRecord> reduced_sync(const Timetable& tt, const SyncParams& params,
                                     std::uint64_t seed, unsigned threads = 1);

// Sliding unweighted mean over values sorted by rank; the output point sits
// at the window's center rank (start + window/2).
RankProfile rank_window_average(std::span<const std::pair<int, double>> values, int window);

inline RankProfile rank_window_average(const std::vector<SyncRecord>& records, int window) {
    std::vector<std::pair<int, double>> v;
    v.reserve(records.size());
    for (const auto& r : records) v.emplace_back(r.rank, r.sigma_star);
    return rank_window_average(std::span(v), window);
}

struct CategoryMeans {
    std::optional<double> small;   // t_k <= low boundary
    std::optional<double> medium;  // low < t_k <= high
    std::optional<double> large;   // t_k > high
};

// Mean sigma* per size class; boundary values go to the smaller class.
CategoryMeans category_means(const std::vector<SyncRecord>& records, int low = 80, int high = 170);

void write_sync_csv(const std::vector<SyncRecord>& records, const std::string& path,
                    const std::string& config_comment = "");
void write_profile_csv(const RankProfile& profile, const std::string& path,
                       const std::string& config_comment = "");
std::vector<SyncRecord> read_sync_csv(const std::string& path);

}  // namespace railsync::sync
