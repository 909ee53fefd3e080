#pragma once

// Command-line front end shared by the leakctl binary and its tests: config
// to module types, the external trace ingester, and one function per
// subcommand writing to a stream.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "leakage/attacker.hpp"
#include "leakage/config.hpp"
#include "leakage/experiment.hpp"
#include "leakage/obfuscator.hpp"
#include "leakage/rng.hpp"
#include "leakage/traffic.hpp"

namespace leakage::cli {

enum class Format { csv, json };

Format parse_format(std::string_view text);

struct RunConfig {
    Config source;
    Seed seed = 0;

    traffic::IntervalModel model;
    obfuscator::KnowledgeModel knowledge;
    obfuscator::WaterfillNormalizer normalizer = obfuscator::WaterfillNormalizer::summed;
    double budget = 1.0;

    attacker::DetectorMode detector = attacker::DetectorMode::idealized;
    double alpha = 0.05;
    attacker::GuessRule guess = attacker::GuessRule::posterior_matching;
    std::size_t h1_samples = 100000;
    std::string h1_cache;  // empty: no cache file

    std::size_t n_intervals = 100000;
    std::vector<double> anomaly_rates;
    std::vector<double> intensities;

    std::vector<double> cost_lambdas;
    std::vector<double> cost_intensities;
    std::vector<double> cost_ks;

    double slot_seconds = 1.0;
    std::string device;  // empty: the trace must hold a single device

    // Validates every field; unknown keys are a ConfigError.
    static RunConfig from(const Config& cfg, Seed seed);

    experiment::CellSpec cell() const;
    experiment::SweepSpec sweep() const;
    attacker::DetectorConfig detector_config() const;
};

// "# leakage <version> config=<hash> seed=<seed>"
std::string header_line(const RunConfig& rc);

struct ExternalTrace {
    std::string device;
    std::vector<double> timestamps;  // seconds, non-decreasing
};

// Reads `timestamp_s,device_id` rows. Rows for other devices are skipped
// when `device` is set; otherwise the file must hold exactly one device.
ExternalTrace read_trace_csv(std::istream& in, const std::string& device, const std::string& origin);

// Writes a run as one timestamp per message, spread inside its slot.
void write_trace_csv(std::ostream& out, const traffic::Run& run, double slot_seconds, const std::string& device);

// Slot index = floor(t / slot_seconds); interval = slot / S. Intervals from
// the first to the last occupied one are returned, empty ones included.
struct BinnedTrace {
    std::int64_t first_interval = 0;
    std::vector<std::vector<traffic::Count>> intervals;
};

BinnedTrace bin_trace(const ExternalTrace& trace, double slot_seconds, int slots);

struct AnalyzeRow {
    std::int64_t interval = 0;
    double dispersion = 0.0;
    bool flagged = false;
    double threshold = 0.0;
};

std::vector<AnalyzeRow> analyze(const BinnedTrace& binned, double alpha);

void cmd_solve(const RunConfig& rc, Format format, std::ostream& out);
void cmd_sweep(const RunConfig& rc, Format format, std::ostream& out);
// Optional side outputs: the obfuscated run and its timestamp trace.
void cmd_simulate(const RunConfig& rc, Format format, std::ostream& out, std::ostream* run_out,
                  std::ostream* trace_out);
void cmd_analyze(const RunConfig& rc, const std::string& trace_path, Format format, std::ostream& out);
void cmd_posterior(const RunConfig& rc, const std::string& fixture_path, bool metrics, std::size_t samples,
                   Format format, std::ostream& out);
void cmd_costs(const RunConfig& rc, Format format, std::ostream& out);

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitInternal = 4;

// Full command line; returns the exit code and never throws.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace leakage::cli
