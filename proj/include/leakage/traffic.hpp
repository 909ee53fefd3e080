#pragma once

// Discretized traffic world: intervals of S Poisson slots at a baseline rate,
// some of which carry a single-slot anomaly of elevated rate.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "leakage/rng.hpp"

namespace leakage::traffic {

using Count = std::int64_t;

struct IntervalModel {
    int slots = 10;             // S
    double lambda = 1.0;        // baseline messages per slot
    double intensity = 1.0;     // I = lambda_A / lambda
    double anomaly_rate = 0.0;  // R_p

    void validate() const;
    double anomaly_lambda() const { return intensity * lambda; }
    double baseline_rate() const { return 1.0 - anomaly_rate; }  // R_n
};

enum class ObfAction { none, waterfilled, fake_anomaly };

std::string_view to_string(ObfAction action);
ObfAction parse_obf_action(std::string_view text);

struct IntervalObservation {
    std::vector<Count> counts;  // what the attacker sees, dummies included
    bool is_anomaly = false;
    std::optional<int> anomaly_slot;
    ObfAction obf_action = ObfAction::none;
    std::vector<Count> dummy_counts;

    void validate(int slots) const;
    Count total() const;
    Count dummy_total() const;
    Count real_total() const { return total() - dummy_total(); }
};

using Run = std::vector<IntervalObservation>;

IntervalObservation gen_interval(const IntervalModel& model, Seed seed);

// Interval i is gen_interval(model, derive_seed(seed, i)).
Run gen_run(const IntervalModel& model, std::size_t n_intervals, Seed seed);

inline constexpr std::string_view kRunCsvHeader =
    "interval,slot,count,dummy_count,is_anomaly,anomaly_slot,obf_action";

// One row per (interval, slot); anomaly_slot is empty when there is none.
void write_run_csv(std::ostream& out, const Run& run);
Run read_run_csv(std::istream& in);

}  // namespace leakage::traffic
