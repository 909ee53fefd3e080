#pragma once

// Dummy-traffic obfuscation against the dispersion attacker: cost of fake
// anomalies and waterfilling, the power-constrained strategy solver for
// complete and incomplete knowledge, and application of a strategy to a run.

#include <span>
#include <string>
#include <string_view>

#include "leakage/attacker.hpp"
#include "leakage/rng.hpp"
#include "leakage/traffic.hpp"

namespace leakage::obfuscator {

using traffic::IntervalModel;

// Denominator of the relative waterfilling cost: lambda S + lambda_A
// (summed), or (S - 1) lambda + lambda_A, the expected real count of an
// anomalous interval (anomalous).
enum class WaterfillNormalizer { summed, anomalous };

std::string_view to_string(WaterfillNormalizer n);
WaterfillNormalizer parse_normalizer(std::string_view text);

// Ratio of expected sample variance to expected mean for independent Poisson
// slots with the given rates.
double expected_dispersion(std::span<const double> slot_rates);

// Expected D of an unobfuscated anomalous interval.
double anomaly_dispersion(const IntervalModel& model);

// Excess rate in one slot of a baseline interval that multiplies the
// expected dispersion (1 for Poisson) by k >= 1.
double solve_fake_rate(const IntervalModel& model, double k);

// Excess rate added to each of the S - 1 quiet slots of an anomalous interval
// that divides its expected dispersion by k >= 1. Throws InfeasibleTarget
// when the target falls below 1.
double solve_waterfill_rate(const IntervalModel& model, double k);
double waterfill_rate_for_target(const IntervalModel& model, double target_dispersion);

double fake_relative_cost(const IntervalModel& model, double lambda_fa);
double waterfill_relative_cost(const IntervalModel& model, double lambda_wf,
                               WaterfillNormalizer normalizer = WaterfillNormalizer::summed);

struct CostModel {
    IntervalModel model;
    WaterfillNormalizer normalizer = WaterfillNormalizer::summed;
    double target_dispersion = 1.0;  // expected D of a real anomaly; fakes aim here
    double lambda_fa = 0.0;
    double lambda_wf = 0.0;
    double fake_cost = 0.0;       // C_f
    double waterfill_cost = 0.0;  // C_wf
};

// Fakes aim at the expected anomalous dispersion, waterfilling at D = 1.
CostModel costs(const IntervalModel& model, WaterfillNormalizer normalizer = WaterfillNormalizer::summed);

struct KnowledgeModel {
    double true_positive = 1.0;  // P_tp
    double true_negative = 1.0;  // P_tn

    void validate() const;
    bool complete() const { return true_positive == 1.0 && true_negative == 1.0; }
};

struct Strategy {
    double waterfill_prob = 0.0;  // P_wf
    double fake_prob = 0.0;       // P_f
    double epsilon = 0.0;
    double cost = 0.0;
    bool feasible_optimal = false;
    bool degenerate = false;  // R_p in {0, 1}
};

// R_p P_wf C_wf + (1 - R_p) P_f C_f
double expected_cost(double waterfill_prob, double fake_prob, const CostModel& cost, double anomaly_rate);

bool power_ok(const Strategy& strategy, const CostModel& cost, double anomaly_rate, double budget = 1.0);

// The two class posteriors whose ratio defines epsilon. given_clear is the
// left-hand side (anomaly waterfilled into baseline-looking traffic),
// given_flagged the right-hand side.
struct PosteriorRatios {
    double given_clear = 0.0;
    double given_flagged = 0.0;
};

PosteriorRatios posterior_ratios(double anomaly_rate, const KnowledgeModel& knowledge,
                                 double waterfill_prob, double fake_prob);

// given_flagged / given_clear - 1. Zero when one class is empty (the attacker
// sees a constant), +inf when no anomaly is ever hidden.
double epsilon(double anomaly_rate, const KnowledgeModel& knowledge, double waterfill_prob,
               double fake_prob);

attacker::ClassMasses class_masses(double anomaly_rate, const KnowledgeModel& knowledge,
                                   double waterfill_prob, double fake_prob);

Strategy solve_strategy(const CostModel& cost, const KnowledgeModel& knowledge, double budget = 1.0);
Strategy solve_strategy(const IntervalModel& model, const KnowledgeModel& knowledge, double budget = 1.0);

// Obfuscates one interval in place using its own stream seed.
void obfuscate_interval(traffic::IntervalObservation& obs, const Strategy& strategy,
                        const KnowledgeModel& knowledge, const CostModel& cost, Seed seed);

// Interval i is obfuscated with derive_seed(seed, i).
traffic::Run apply_strategy(const traffic::Run& run, const Strategy& strategy,
                            const KnowledgeModel& knowledge, const CostModel& cost, Seed seed);

// Mean over intervals of dummies divided by the cost normalizer of the
// interval's true class (lambda S for baseline, the waterfill normalizer for
// anomalies).
double realized_relative_cost(const traffic::Run& run, const CostModel& cost);

// Expectation of realized_relative_cost including the complementary actions
// taken on mispredicted intervals. Equals expected_cost() under complete knowledge.
double expected_realized_cost(const Strategy& strategy, const KnowledgeModel& knowledge,
                              const CostModel& cost);

std::string strategy_json(const Strategy& strategy, const IntervalModel& model,
                          const KnowledgeModel& knowledge);

}  // namespace leakage::obfuscator
