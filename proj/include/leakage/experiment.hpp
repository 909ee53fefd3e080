#pragma once

// Monte-Carlo cells and parameter sweeps over (R_p, I): solve a strategy,
// generate and obfuscate a run, attack it, and report guessing error and
// conditional entropy next to the prior-only ideal values.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "leakage/attacker.hpp"
#include "leakage/obfuscator.hpp"
#include "leakage/rng.hpp"
#include "leakage/traffic.hpp"

namespace leakage::experiment {

// H2(p) in bits.
double binary_entropy(double p);

struct CellSpec {
    traffic::IntervalModel model;
    obfuscator::KnowledgeModel knowledge;
    obfuscator::WaterfillNormalizer normalizer = obfuscator::WaterfillNormalizer::summed;
    double budget = 1.0;
    attacker::DetectorMode detector = attacker::DetectorMode::idealized;
    double alpha = 0.05;
    attacker::GuessRule guess = attacker::GuessRule::posterior_matching;
    std::size_t n_intervals = 100000;
    Seed seed = 1;

    void validate() const;
};

struct MetricsReport {
    double anomaly_rate = 0.0;
    double intensity = 0.0;
    int slots = 0;
    double lambda = 0.0;
    double true_positive = 1.0;
    double true_negative = 1.0;
    double budget = 1.0;

    obfuscator::Strategy strategy;

    double guess_err = 0.0;
    double guess_err_se = 0.0;
    double ce_bits = 0.0;
    double ce_bits_se = 0.0;
    double ideal_guess_err = 0.0;
    double ideal_ce_bits = 0.0;

    // Posterior the attacker acts on (closed-form class algebra for the
    // idealized detector, a calibration run for chi-square) next to the one
    // measured on the evaluated run.
    attacker::ClassPosterior attacker_posterior;
    attacker::ClassPosterior empirical_posterior;
    double realized_cost = 0.0;

    std::string error;  // non-empty when the cell failed
};

// Deterministic given spec.seed.
MetricsReport run_cell(const CellSpec& spec, attacker::H1Cache* h1_cache = nullptr);

struct SweepSpec {
    std::vector<double> anomaly_rates;
    std::vector<double> intensities;
    CellSpec base;  // model.anomaly_rate, model.intensity and seed are overridden per cell

    void validate() const;
};

// Seed of the (R_p, I) cell, independent of the rest of the grid.
Seed cell_seed(Seed base, double anomaly_rate, double intensity);

// One record per cell, ordered by intensity then anomaly rate. Failing cells
// carry an error message; the sweep continues.
std::vector<MetricsReport> run_sweep(const SweepSpec& spec, attacker::H1Cache* h1_cache = nullptr);

inline constexpr std::string_view kSweepCsvHeader =
    "R_p,I,S,lambda,P_tp,P_tn,budget,P_wf,P_f,epsilon,cost,feasible_optimal,guess_err,"
    "guess_err_se,ce_bits,ce_bits_se,ideal_guess_err,ideal_ce_bits";

void write_sweep_csv(std::ostream& out, std::span<const MetricsReport> reports);
std::string reports_json(std::span<const MetricsReport> reports);

struct CostCurveRow {
    double k = 1.0;
    int slots = 0;
    double lambda = 0.0;
    double intensity = 0.0;
    double fake_cost = 0.0;
    double waterfill_cost = 0.0;
    bool waterfill_feasible = true;
};

// Relative cost of shifting the expected dispersion by a factor k: up with a
// fake anomaly, down with waterfilling. Waterfill targets below D = 1 are
// kept and marked infeasible.
std::vector<CostCurveRow> cost_curves(int slots, std::span<const double> lambdas,
                                      std::span<const double> intensities, std::span<const double> ks,
                                      obfuscator::WaterfillNormalizer normalizer =
                                          obfuscator::WaterfillNormalizer::summed);

inline constexpr std::string_view kCostCsvHeader = "k,S,lambda,I,C_f,C_wf,wf_feasible";

void write_cost_csv(std::ostream& out, std::span<const CostCurveRow> rows);

}  // namespace leakage::experiment
