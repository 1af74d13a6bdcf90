#include "railsync/report.hpp"

#include <algorithm>
#include <array>
#include <fstream>

#include "railsync/csv.hpp"
#include "railsync/stats.hpp"

namespace railsync::report {

const char* label(Quadrant q) {
    switch (q) {
        case Quadrant::pp: return "++";
        case Quadrant::pm: return "+-";
        case Quadrant::mm: return "--";
        case Quadrant::mp: return "-+";
    }
    return "--";
}

namespace {

double s_value(const StationMetrics& m, Minutes p) {
    auto it = m.s.find(p);
    if (it == m.s.end())
        throw ReportError("station '" + m.station + "' has no secondary delay for p = " +
                          std::to_string(p));
    return it->second;
}

}  // namespace

QuadrantResult quadrant_classify(std::span<const StationMetrics> metrics, Minutes p,
                                 std::optional<std::pair<double, double>> thresholds) {
    if (metrics.empty()) throw ReportError("quadrant_classify: no stations");
    QuadrantResult result;
    if (thresholds) {
        result.b_threshold = thresholds->first;
        result.s_threshold = thresholds->second;
    } else {
        std::vector<double> bs, ss;
        for (const auto& m : metrics) {
            bs.push_back(m.buffering);
            ss.push_back(s_value(m, p));
        }
        result.b_threshold = median(std::move(bs));
        result.s_threshold = median(std::move(ss));
    }
    for (const auto& m : metrics) {
        const bool efficient = m.buffering < result.b_threshold;
        const bool robust = s_value(m, p) < result.s_threshold;
        const Quadrant q = efficient ? (robust ? Quadrant::pp : Quadrant::pm)
                                     : (robust ? Quadrant::mp : Quadrant::mm);
        result.assignment[m.station] = q;
        ++result.counts[q];
    }
    return result;
}

std::vector<StationMetrics> smooth_metrics(std::span<const StationMetrics> metrics, Minutes p,
                                           int window) {
    if (window < 1) throw ReportError("smooth_metrics: window must be positive");
    std::vector<const StationMetrics*> sorted;
    sorted.reserve(metrics.size());
    for (const auto& m : metrics) sorted.push_back(&m);
    std::sort(sorted.begin(), sorted.end(),
              [](const StationMetrics* a, const StationMetrics* b) { return a->rank < b->rank; });
    const int n = static_cast<int>(sorted.size());
    const int half = window / 2;
    std::vector<StationMetrics> out;
    out.reserve(metrics.size());
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - half);
        const int hi = std::min(n - 1, i + half);
        double b = 0, s = 0;
        for (int j = lo; j <= hi; ++j) {
            b += sorted[j]->buffering;
            s += s_value(*sorted[j], p);
        }
        StationMetrics m = *sorted[i];
        m.buffering = b / (hi - lo + 1);
        m.s[p] = s / (hi - lo + 1);
        out.push_back(std::move(m));
    }
    return out;
}

Correlation correlate(std::span<const double> x, std::span<const double> y, double ratio) {
    Correlation c;
    c.r = pearson(x, y);
    c.pairs.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        c.pairs.push_back({x[i], y[i], ratio * x[i]});
    return c;
}

std::map<Quadrant, double> sync_by_quadrant(std::span<const StationMetrics> metrics,
                                            const QuadrantResult& quadrants) {
    std::map<Quadrant, std::pair<double, long long>> acc;
    for (const auto& m : metrics) {
        auto it = quadrants.assignment.find(m.station);
        if (it == quadrants.assignment.end())
            throw ReportError("station '" + m.station + "' missing from quadrant assignment");
        auto& [sum, count] = acc[it->second];
        sum += m.sigma_star;
        ++count;
    }
    std::map<Quadrant, double> out;
    for (const auto& [q, sc] : acc) out[q] = sc.first / static_cast<double>(sc.second);
    return out;
}

std::vector<JointProfileRow> joint_profile(std::span<const StationMetrics> metrics, Minutes p,
                                           int window) {
    if (window < 1) throw ReportError("joint_profile: window must be positive");
    if (window > static_cast<int>(metrics.size()))
        throw ReportError("joint_profile: window larger than station count");
    std::vector<const StationMetrics*> sorted;
    sorted.reserve(metrics.size());
    for (const auto& m : metrics) sorted.push_back(&m);
    std::sort(sorted.begin(), sorted.end(),
              [](const StationMetrics* a, const StationMetrics* b) { return a->rank < b->rank; });

    std::vector<JointProfileRow> rows;
    const int n = static_cast<int>(sorted.size());
    for (int start = 0; start + window <= n; ++start) {
        JointProfileRow row;
        row.center_rank = sorted[start + window / 2]->rank;
        double b = 0, s = 0, sigma = 0;
        for (int i = start; i < start + window; ++i) {
            b += sorted[i]->buffering;
            s += s_value(*sorted[i], p);
            sigma += sorted[i]->sigma_star;
        }
        row.b_avg = b / window;
        row.s_avg = s / window;
        row.sigma_star_avg = sigma / window;
        rows.push_back(row);
    }
    return rows;
}

std::vector<StationMetrics> assemble_metrics(
    const Timetable& tt, const std::vector<sync::SyncRecord>& sync_records,
    const std::map<std::string, double>& buffering, const std::map<std::string, double>& slack,
    const std::vector<Minutes>& p_values,
    const std::map<std::pair<std::string, Minutes>, double>& s_mean) {
    (void)tt;
    std::vector<StationMetrics> out;
    for (const auto& rec : sync_records) {
        auto bit = buffering.find(rec.station);
        if (bit == buffering.end()) continue;  // stations without transfers carry no b
        StationMetrics m;
        m.station = rec.station;
        m.rank = rec.rank;
        m.t_k = rec.t_k;
        m.sigma_star = rec.sigma_star;
        m.buffering = bit->second;
        if (auto sit = slack.find(rec.station); sit != slack.end()) m.buffer_slack = sit->second;
        bool complete = true;
        for (Minutes p : p_values) {
            auto it = s_mean.find({rec.station, p});
            if (it == s_mean.end()) {
                complete = false;
                break;
            }
            m.s[p] = it->second;
        }
        if (complete) out.push_back(std::move(m));
    }
    std::sort(out.begin(), out.end(),
              [](const StationMetrics& a, const StationMetrics& b) { return a.rank < b.rank; });
    return out;
}

void write_metrics_csv(std::span<const StationMetrics> metrics, const QuadrantResult& quadrants,
                       const std::vector<Minutes>& p_values, const std::string& path,
                       const std::string& config_comment) {
    std::ofstream out(path);
    if (!out) throw ReportError("cannot write " + path);
    if (!config_comment.empty()) out << "# " << config_comment << "\n";
    out << "# thresholds: b=" << format_double(quadrants.b_threshold)
        << " s=" << format_double(quadrants.s_threshold) << "\n";
    out << "station_id,rank,t_k,b";
    for (Minutes p : p_values) out << ",s_p" << p;
    out << ",sigma_star,quadrant,b_slack\n";
    for (const auto& m : metrics) {
        out << csv_escape(m.station) << ',' << m.rank << ',' << m.t_k << ','
            << format_double(m.buffering);
        for (Minutes p : p_values) out << ',' << format_double(m.s.at(p));
        out << ',' << format_double(m.sigma_star) << ','
            << label(quadrants.assignment.at(m.station)) << ',' << format_double(m.buffer_slack)
            << '\n';
    }
}

void write_joint_profile_csv(std::span<const JointProfileRow> rows, const std::string& path,
                             const std::string& config_comment) {
    std::ofstream out(path);
    if (!out) throw ReportError("cannot write " + path);
    if (!config_comment.empty()) out << "# " << config_comment << "\n";
    out << "center_rank,b_avg,s_avg,sigma_star_avg\n";
    for (const auto& r : rows)
        out << r.center_rank << ',' << format_double(r.b_avg) << ',' << format_double(r.s_avg)
            << ',' << format_double(r.sigma_star_avg) << '\n';
}

void write_quadrants_csv(const QuadrantResult& quadrants,
                         const std::map<Quadrant, double>& sigma_means, const std::string& path,
                         const std::string& config_comment) {
    std::ofstream out(path);
    if (!out) throw ReportError("cannot write " + path);
    if (!config_comment.empty()) out << "# " << config_comment << "\n";
    out << "# thresholds: b=" << format_double(quadrants.b_threshold)
        << " s=" << format_double(quadrants.s_threshold) << "\n";
    out << "label,count,sigma_star_mean\n";
    for (const Quadrant q : {Quadrant::pp, Quadrant::pm, Quadrant::mm, Quadrant::mp}) {
        auto it = quadrants.counts.find(q);
        if (it == quadrants.counts.end()) continue;
        out << label(q) << ',' << it->second << ',';
        auto ms = sigma_means.find(q);
        out << (ms != sigma_means.end() ? format_double(ms->second) : "") << '\n';
    }
}

}  // namespace railsync::report
