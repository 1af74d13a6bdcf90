#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "railsync/timetable.hpp"

// Event-scheduling constraint systems: difference constraints
// lo <= pi_j - pi_i (+ T*k) <= hi, verified against a candidate timetable
// vector. Only feasibility checking; no solving.

namespace railsync::pesp {

// Sentinel for an unbounded upper edge bound, kept finite so all arithmetic
// stays in integers.
constexpr double kUnbounded = 1e9;

struct Constraint {
    std::string from;  // event i
    std::string to;    // event j
    double lo = 0.0;
    double hi = 0.0;
};

struct PespInstance {
    std::vector<std::string> events;
    std::vector<Constraint> constraints;
    std::optional<double> period;
};

struct TimetableVector {
    std::map<std::string, double> pi;
};

struct Violation {
    std::size_t constraint_index = 0;
    double difference = 0.0;  // pi_j - pi_i as evaluated
};

struct PeriodicResult {
    std::vector<Violation> violations;
    // For each satisfied constraint index, the smallest integer k with
    // lo <= pi_j - pi_i + T*k <= hi.
    std::map<std::size_t, long long> witnesses;

    bool feasible() const { return violations.empty(); }
};

class PespError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::vector<Violation> verify_nonperiodic(const PespInstance& inst, const TimetableVector& pi);

// k is searched by closed-form interval bounds ceil((lo-d)/T) .. floor((hi-d)/T).
PeriodicResult verify_periodic(const PespInstance& inst, const TimetableVector& pi);

struct ExtractOptions {
    Minutes min_standing = 2;
    Minutes transfer_window = 120;
};

struct Extracted {
    PespInstance instance;
    TimetableVector pi;
};

// One event per departure/arrival; traveling constraints pin the scheduled
// duration, standing constraints bound the dwell from below, transfer
// constraints carry [min_transfer, window]. pi holds scheduled times mod T.
Extracted extract_pesp(const Timetable& tt, const std::vector<TransferOpportunity>& transfers,
                       double period, const ExtractOptions& opt = {});

std::string to_json(const PespInstance& inst, const TimetableVector& pi);
std::pair<PespInstance, TimetableVector> from_json(const std::string& text);

}  // namespace railsync::pesp
