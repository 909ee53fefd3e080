#pragma once

// Data-parallel inner loops. Each kernel exists twice with the same contract:
// serial:: is the reference loop, omp:: the OpenMP version used by the public
// API. Every item draws from its own derived seed and reductions happen after
// the loop, so both produce bit-identical output.

#include <cstddef>
#include <span>
#include <vector>

#include "leakage/attacker.hpp"
#include "leakage/obfuscator.hpp"
#include "leakage/rng.hpp"
#include "leakage/trace.hpp"
#include "leakage/traffic.hpp"

namespace leakage::kernels {

// Per-sample contribution to the trace-level metrics.
struct TraceSample {
    double loss = 0.0;          // E[d(R, R*) | X] for the optimal guess R*
    double entropy_bits = 0.0;  // H(R | X)
};

namespace serial {
traffic::Run generate(const traffic::IntervalModel& model, std::size_t n, Seed seed);
void obfuscate(traffic::Run& run, const obfuscator::Strategy& strategy,
               const obfuscator::KnowledgeModel& knowledge, const obfuscator::CostModel& cost,
               Seed seed);
std::vector<attacker::DispersionStat> dispersions(const traffic::Run& run);
std::vector<attacker::Verdict> verdicts(const traffic::Run& run, const attacker::DetectorConfig& cfg);
std::vector<bool> guesses(std::span<const attacker::Verdict> verdicts,
                          const attacker::DetectorConfig& cfg, Seed seed);
std::vector<TraceSample> trace_samples(const trace::TracePrior& prior, const trace::Mechanism& mech,
                                       const trace::DistanceFn* dist, std::size_t n, Seed seed);
}  // namespace serial

namespace omp {
traffic::Run generate(const traffic::IntervalModel& model, std::size_t n, Seed seed);
void obfuscate(traffic::Run& run, const obfuscator::Strategy& strategy,
               const obfuscator::KnowledgeModel& knowledge, const obfuscator::CostModel& cost,
               Seed seed);
std::vector<attacker::DispersionStat> dispersions(const traffic::Run& run);
std::vector<attacker::Verdict> verdicts(const traffic::Run& run, const attacker::DetectorConfig& cfg);
std::vector<bool> guesses(std::span<const attacker::Verdict> verdicts,
                          const attacker::DetectorConfig& cfg, Seed seed);
std::vector<TraceSample> trace_samples(const trace::TracePrior& prior, const trace::Mechanism& mech,
                                       const trace::DistanceFn* dist, std::size_t n, Seed seed);
}  // namespace omp

}  // namespace leakage::kernels
