#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "railsync/sync.hpp"
#include "railsync/timetable.hpp"

// Cross-cutting analytics joining buffering time b, secondary delay s(p) and
// the reduced synchronization index sigma*: quadrant classification of the
// b-s(p) plane, correlations, and rank-aligned smoothing.

namespace railsync::report {

struct StationMetrics {
    std::string station;
    int rank = 0;
    int t_k = 0;
    double buffering = 0.0;             // b, mean interchange gap
    std::map<Minutes, double> s;        // p -> s_mean
    double sigma_star = 0.0;
    double buffer_slack = 0.0;          // derived: mean gap above min_transfer
};

enum class Quadrant { pp, pm, mm, mp };  // first sign: efficiency, second: robustness
const char* label(Quadrant q);

struct QuadrantResult {
    std::map<std::string, Quadrant> assignment;
    std::map<Quadrant, int> counts;
    double b_threshold = 0.0;
    double s_threshold = 0.0;
};

class ReportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// b below threshold earns efficiency '+', s(p) below threshold robustness '+';
// values equal to the threshold are classified '-'. Default thresholds are
// the medians of b and s(p).
QuadrantResult quadrant_classify(std::span<const StationMetrics> metrics, Minutes p,
                                 std::optional<std::pair<double, double>> thresholds = {});

// Replaces each station's b and s(p) with a rank-centered windowed mean
// (windows shrink at the rank boundaries so every station keeps a value).
// Feeding the result to quadrant_classify gives the smoothed-curve split.
std::vector<StationMetrics> smooth_metrics(std::span<const StationMetrics> metrics, Minutes p,
                                           int window);

struct Correlation {
    std::optional<double> r;  // absent when either series has zero variance
    // (x, y, y_lin = ratio * x) per point, in input order.
    std::vector<std::array<double, 3>> pairs;
};

Correlation correlate(std::span<const double> x, std::span<const double> y, double ratio);

// Mean sigma* per populated quadrant.
std::map<Quadrant, double> sync_by_quadrant(std::span<const StationMetrics> metrics,
                                            const QuadrantResult& quadrants);

struct JointProfileRow {
    int center_rank = 0;
    double b_avg = 0.0;
    double s_avg = 0.0;
    double sigma_star_avg = 0.0;
};

// rank_window_average applied to b, s(p) and sigma* with identical alignment.
std::vector<JointProfileRow> joint_profile(std::span<const StationMetrics> metrics, Minutes p,
                                           int window = 26);

std::vector<StationMetrics> assemble_metrics(const Timetable& tt,
                                             const std::vector<sync::SyncRecord>& sync_records,
                                             const std::map<std::string, double>& buffering,
                                             const std::map<std::string, double>& slack,
                                             const std::vector<Minutes>& p_values,
                                             const std::map<std::pair<std::string, Minutes>, double>& s_mean);

void write_metrics_csv(std::span<const StationMetrics> metrics, const QuadrantResult& quadrants,
                       const std::vector<Minutes>& p_values, const std::string& path,
                       const std::string& config_comment = "");
void write_joint_profile_csv(std::span<const JointProfileRow> rows, const std::string& path,
                             const std::string& config_comment = "");
void write_quadrants_csv(const QuadrantResult& quadrants,
                         const std::map<Quadrant, double>& sigma_means, const std::string& path,
                         const std::string& config_comment = "");

}  // namespace railsync::report
