#include "leakage/kernels.hpp"

#include <random>

namespace leakage::kernels::serial {

traffic::Run generate(const traffic::IntervalModel& model, std::size_t n, Seed seed) {
    traffic::Run run(n);
    for (std::size_t i = 0; i < n; ++i) run[i] = traffic::gen_interval(model, derive_seed(seed, i));
    return run;
}

void obfuscate(traffic::Run& run, const obfuscator::Strategy& strategy, const obfuscator::KnowledgeModel& knowledge,
               const obfuscator::CostModel& cost, Seed seed) {
    for (std::size_t i = 0; i < run.size(); ++i)
        obfuscator::obfuscate_interval(run[i], strategy, knowledge, cost, derive_seed(seed, i));
}

std::vector<attacker::DispersionStat> dispersions(const traffic::Run& run) {
    std::vector<attacker::DispersionStat> out(run.size());
    for (std::size_t i = 0; i < run.size(); ++i) out[i] = attacker::dispersion(run[i].counts);
    return out;
}

std::vector<attacker::Verdict> verdicts(const traffic::Run& run, const attacker::DetectorConfig& cfg) {
    std::vector<attacker::Verdict> out(run.size());
    for (std::size_t i = 0; i < run.size(); ++i) out[i] = attacker::test_interval(run[i], cfg);
    return out;
}

std::vector<bool> guesses(std::span<const attacker::Verdict> verdicts, const attacker::DetectorConfig& cfg,
                          Seed seed) {
    std::vector<bool> out(verdicts.size());
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        const double p = verdicts[i].posterior_anomaly;
        if (cfg.guess == attacker::GuessRule::map) {
            out[i] = p > 0.5;
        } else {
            Rng rng(derive_seed(seed, i));
            out[i] = rng.uniform() < p;
        }
    }
    return out;
}

std::vector<TraceSample> trace_samples(const trace::TracePrior& prior, const trace::Mechanism& mech,
                                       const trace::DistanceFn* dist, std::size_t n, Seed seed) {
    std::vector<TraceSample> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(derive_seed(seed, i));
        const auto& real = prior.sample(rng);
        const auto observed = mech.sample(real, rng);
        const auto s = trace::summarize_observation(prior, mech, observed, dist);
        out[i] = {s.expected_loss, s.entropy_bits};
    }
    return out;
}

}  // namespace leakage::kernels::serial
