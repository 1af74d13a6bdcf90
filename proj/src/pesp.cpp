#include "railsync/pesp.hpp"

#include <cmath>

#include <json.hpp>

namespace railsync::pesp {

namespace {

double lookup(const TimetableVector& pi, const std::string& event) {
    auto it = pi.pi.find(event);
    if (it == pi.pi.end()) throw PespError("unassigned event id '" + event + "'");
    return it->second;
}

void check_instance(const PespInstance& inst) {
    for (std::size_t i = 0; i < inst.constraints.size(); ++i) {
        const Constraint& c = inst.constraints[i];
        if (c.lo > c.hi)
            throw PespError("constraint " + std::to_string(i) + ": lo " + std::to_string(c.lo) +
                            " exceeds hi " + std::to_string(c.hi));
    }
}

}  // namespace

std::vector<Violation> verify_nonperiodic(const PespInstance& inst, const TimetableVector& pi) {
    check_instance(inst);
    std::vector<Violation> out;
    for (std::size_t i = 0; i < inst.constraints.size(); ++i) {
        const Constraint& c = inst.constraints[i];
        const double d = lookup(pi, c.to) - lookup(pi, c.from);
        if (d < c.lo || d > c.hi) out.push_back({i, d});
    }
    return out;
}

PeriodicResult verify_periodic(const PespInstance& inst, const TimetableVector& pi) {
    check_instance(inst);
    if (!inst.period) throw PespError("verify_periodic: instance has no period");
    const double T = *inst.period;
    if (T <= 0) throw PespError("verify_periodic: period must be positive");
    for (const auto& [event, value] : pi.pi)
        if (value < 0 || value >= T)
            throw PespError("verify_periodic: pi[" + event + "] = " + std::to_string(value) +
                            " outside [0, T)");

    PeriodicResult result;
    for (std::size_t i = 0; i < inst.constraints.size(); ++i) {
        const Constraint& c = inst.constraints[i];
        const double d = lookup(pi, c.to) - lookup(pi, c.from);
        // smallest k with lo <= d + T*k, then check against hi
        const long long k_lo = static_cast<long long>(std::ceil((c.lo - d) / T - 1e-9));
        const long long k_hi = static_cast<long long>(std::floor((c.hi - d) / T + 1e-9));
        if (k_lo <= k_hi) result.witnesses[i] = k_lo;
        else result.violations.push_back({i, d});
    }
    return result;
}

Extracted extract_pesp(const Timetable& tt, const std::vector<TransferOpportunity>& transfers,
                       double period, const ExtractOptions& opt) {
    if (period <= 0) throw PespError("extract_pesp: period must be positive");
    Extracted ex;
    ex.instance.period = period;

    const auto event_id = [](const char* kind, const std::string& train, int seg) {
        return std::string(kind) + ":" + train + ":" + std::to_string(seg);
    };
    const auto wrap = [&](Minutes t) {
        double v = std::fmod(static_cast<double>(t), period);
        if (v < 0) v += period;
        return v;
    };

    for (const auto& [id, run] : tt.runs) {
        for (std::size_t s = 0; s < run.segments.size(); ++s) {
            const Segment& seg = run.segments[s];
            const std::string dep = event_id("dep", id, static_cast<int>(s));
            const std::string arr = event_id("arr", id, static_cast<int>(s));
            ex.instance.events.push_back(dep);
            ex.instance.events.push_back(arr);
            ex.pi.pi[dep] = wrap(seg.dep_time);
            ex.pi.pi[arr] = wrap(seg.arr_time);
            const double duration = seg.arr_time - seg.dep_time;
            ex.instance.constraints.push_back({dep, arr, duration, duration});
            if (s > 0) {
                const std::string prev_arr = event_id("arr", id, static_cast<int>(s) - 1);
                const Minutes dwell = seg.dep_time - run.segments[s - 1].arr_time;
                const double standing = std::min<double>(opt.min_standing, dwell);
                ex.instance.constraints.push_back({prev_arr, dep, standing, kUnbounded});
            }
        }
    }
    for (const auto& t : transfers) {
        const std::string from = event_id("arr", t.from_train, t.from_segment);
        const std::string to = event_id("dep", t.to_train, t.to_segment);
        ex.instance.constraints.push_back(
            {from, to, static_cast<double>(tt.stations.at(t.station).min_transfer),
             static_cast<double>(opt.transfer_window)});
    }
    return ex;
}

std::string to_json(const PespInstance& inst, const TimetableVector& pi) {
    nlohmann::json j;
    if (inst.period) j["period"] = *inst.period;
    else j["period"] = nullptr;
    j["events"] = inst.events;
    j["constraints"] = nlohmann::json::array();
    for (const Constraint& c : inst.constraints)
        j["constraints"].push_back({{"i", c.from}, {"j", c.to}, {"lo", c.lo}, {"hi", c.hi}});
    j["pi"] = nlohmann::json::object();
    for (const auto& [event, value] : pi.pi) j["pi"][event] = value;
    return j.dump(2);
}

std::pair<PespInstance, TimetableVector> from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    PespInstance inst;
    if (j.contains("period") && !j["period"].is_null()) inst.period = j["period"].get<double>();
    if (j.contains("events")) inst.events = j["events"].get<std::vector<std::string>>();
    for (const auto& c : j.at("constraints"))
        inst.constraints.push_back({c.at("i").get<std::string>(), c.at("j").get<std::string>(),
                                    c.at("lo").get<double>(), c.at("hi").get<double>()});
    TimetableVector pi;
    if (j.contains("pi"))
        for (const auto& [event, value] : j["pi"].items()) pi.pi[event] = value.get<double>();
    return {inst, pi};
}

}  // namespace railsync::pesp
