#pragma once

// Index-of-dispersion attacker: per-interval statistic, the H0: D = 1 versus
// H1: D > 1 test, class posteriors, and the randomized posterior-matching
// guesser.

#include <cstddef>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "leakage/rng.hpp"
#include "leakage/traffic.hpp"

namespace leakage::attacker {

using traffic::Count;

struct DispersionStat {
    double mean = 0.0;
    double variance = 0.0;    // Bessel-corrected
    double dispersion = 0.0;  // variance / mean, 0 when degenerate
    bool degenerate = false;  // every count is zero
};

DispersionStat dispersion(std::span<const Count> counts);

// Empirical distribution of D for unobfuscated anomalous intervals,
// stored as a quantile table.
class H1Distribution {
public:
    struct Point {
        double p = 0.0;
        double value = 0.0;
    };

    H1Distribution(int slots, double lambda, double intensity, std::vector<Point> quantiles);

    static H1Distribution simulate(int slots, double lambda, double intensity, std::size_t n,
                                   Seed seed);

    int slots() const { return slots_; }
    double lambda() const { return lambda_; }
    double intensity() const { return intensity_; }
    const std::vector<Point>& quantiles() const { return quantiles_; }

    double quantile(double p) const;
    double cdf(double d) const;

private:
    int slots_;
    double lambda_;
    double intensity_;
    std::vector<Point> quantiles_;
};

inline constexpr std::string_view kH1CsvHeader = "S,lambda,intensity,quantile_p,value";

void write_h1_csv(std::ostream& out, std::span<const H1Distribution> tables);
std::vector<H1Distribution> read_h1_csv(std::istream& in);

// Simulates each (S, lambda, I) cell once; entries are immutable after insertion.
class H1Cache {
public:
    explicit H1Cache(std::size_t samples = 100000, Seed seed = 0x4831) : samples_(samples), seed_(seed) {}

    std::shared_ptr<const H1Distribution> get(int slots, double lambda, double intensity);
    void insert(H1Distribution table);

    void load(const std::string& path);
    void save(const std::string& path) const;
    std::size_t size() const;

private:
    using Key = std::tuple<int, double, double>;

    std::size_t samples_;
    Seed seed_;
    mutable std::mutex mutex_;
    std::map<Key, std::shared_ptr<const H1Distribution>> tables_;
};

enum class DetectorMode { chi_square, idealized };
enum class GuessRule { posterior_matching, map };

std::string_view to_string(DetectorMode mode);
DetectorMode parse_detector_mode(std::string_view text);
std::string_view to_string(GuessRule rule);
GuessRule parse_guess_rule(std::string_view text);

struct DetectorConfig {
    DetectorMode mode = DetectorMode::idealized;
    double alpha = 0.05;
    double anomaly_rate = 0.0;  // attacker's knowledge of R_p
    GuessRule guess = GuessRule::posterior_matching;
    std::shared_ptr<const H1Distribution> h1;

    void validate() const;
};

struct Verdict {
    bool flagged = false;
    double statistic = 0.0;
    double threshold = 0.0;
    double posterior_anomaly = 0.0;
};

// Upper 1 - alpha quantile of chi-square with S - 1 degrees of freedom.
double chi_square_threshold(int slots, double alpha);

// Chi-square dispersion test on the summed counts alone: flags when
// (S - 1) D exceeds the threshold. Degenerate intervals are never flagged.
Verdict test_counts(std::span<const Count> counts, const DetectorConfig& cfg);

// The idealized detector sees through to the post-obfuscation class: real
// anomalies that were not waterfilled, and fake anomalies, look anomalous.
bool looks_anomalous(const traffic::IntervalObservation& obs);

Verdict test_interval(const traffic::IntervalObservation& obs, const DetectorConfig& cfg);

// Joint mass of (truth, observable class) for one interval.
struct ClassMasses {
    double anomaly_flagged = 0.0;
    double anomaly_clear = 0.0;
    double baseline_flagged = 0.0;
    double baseline_clear = 0.0;
};

// P(anomaly | class). A class with no mass falls back to the prior.
struct ClassPosterior {
    double given_flagged = 0.0;
    double given_clear = 0.0;

    double operator()(bool flagged) const { return flagged ? given_flagged : given_clear; }
};

ClassPosterior posterior_from_masses(const ClassMasses& masses);

// Counts (truth, flagged) pairs and normalizes them.
ClassMasses empirical_masses(std::span<const Verdict> verdicts, const std::vector<bool>& truths);

// Unobfuscated chi-square attacker: flag rate alpha under H0 and the H1
// table's power under H1. Requires cfg.h1.
ClassPosterior chi_square_posterior(const DetectorConfig& cfg, int slots);

void assign_posteriors(std::span<Verdict> verdicts, const ClassPosterior& posterior);

std::vector<Verdict> test_run(const traffic::Run& run, const DetectorConfig& cfg);

// Guess i is drawn from derive_seed(seed, i). Posterior-matching guesses
// anomaly with probability posterior_anomaly; MAP guesses it when > 1/2.
std::vector<bool> guess_run(std::span<const Verdict> verdicts, const DetectorConfig& cfg, Seed seed);

// Fraction of true anomalies not guessed. Throws UndefinedMetric without anomalies.
double guessing_error(const std::vector<bool>& guesses, const std::vector<bool>& truths);

std::vector<bool> truths(const traffic::Run& run);

}  // namespace leakage::attacker
