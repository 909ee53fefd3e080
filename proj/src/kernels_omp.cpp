#include "leakage/kernels.hpp"

#include <exception>
#include <mutex>

namespace leakage::kernels::omp {

namespace {

// Exceptions must not escape an OpenMP region; keep the first and rethrow.
class ErrorSlot {
public:
    template <class F>
    void run(F&& f) noexcept {
        try {
            f();
        } catch (...) {
            std::lock_guard lock(mutex_);
            if (!error_) error_ = std::current_exception();
        }
    }
    void rethrow() const {
        if (error_) std::rethrow_exception(error_);
    }

private:
    std::mutex mutex_;
    std::exception_ptr error_;
};

using Index = std::int64_t;

}  // namespace

traffic::Run generate(const traffic::IntervalModel& model, std::size_t n, Seed seed) {
    traffic::Run run(n);
    const auto count = static_cast<Index>(n);
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < count; ++i) {
        run[i] = traffic::gen_interval(model, derive_seed(seed, static_cast<std::uint64_t>(i)));
    }
    return run;
}

void obfuscate(traffic::Run& run, const obfuscator::Strategy& strategy, const obfuscator::KnowledgeModel& knowledge,
               const obfuscator::CostModel& cost, Seed seed) {
    const auto count = static_cast<Index>(run.size());
    ErrorSlot errors;
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < count; ++i) {
        errors.run([&] {
            obfuscator::obfuscate_interval(run[i], strategy, knowledge, cost,
                                           derive_seed(seed, static_cast<std::uint64_t>(i)));
        });
    }
    errors.rethrow();
}

std::vector<attacker::DispersionStat> dispersions(const traffic::Run& run) {
    std::vector<attacker::DispersionStat> out(run.size());
    const auto count = static_cast<Index>(run.size());
    ErrorSlot errors;
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < count; ++i) {
        errors.run([&] { out[i] = attacker::dispersion(run[i].counts); });
    }
    errors.rethrow();
    return out;
}

std::vector<attacker::Verdict> verdicts(const traffic::Run& run, const attacker::DetectorConfig& cfg) {
    std::vector<attacker::Verdict> out(run.size());
    const auto count = static_cast<Index>(run.size());
    ErrorSlot errors;
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < count; ++i) {
        errors.run([&] { out[i] = attacker::test_interval(run[i], cfg); });
    }
    errors.rethrow();
    return out;
}

std::vector<bool> guesses(std::span<const attacker::Verdict> verdicts, const attacker::DetectorConfig& cfg,
                          Seed seed) {
    // vector<bool> packs bits, so threads write into bytes first.
    std::vector<unsigned char> bytes(verdicts.size());
    const auto count = static_cast<Index>(verdicts.size());
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < count; ++i) {
        const double p = verdicts[i].posterior_anomaly;
        if (cfg.guess == attacker::GuessRule::map) {
            bytes[i] = p > 0.5;
        } else {
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
            bytes[i] = rng.uniform() < p;
        }
    }
    return std::vector<bool>(bytes.begin(), bytes.end());
}

std::vector<TraceSample> trace_samples(const trace::TracePrior& prior, const trace::Mechanism& mech,
                                       const trace::DistanceFn* dist, std::size_t n, Seed seed) {
    std::vector<TraceSample> out(n);
    const auto count = static_cast<Index>(n);
    ErrorSlot errors;
#pragma omp parallel for schedule(dynamic, 256)
    for (Index i = 0; i < count; ++i) {
        errors.run([&] {
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
            const auto& real = prior.sample(rng);
            const auto observed = mech.sample(real, rng);
            const auto s = trace::summarize_observation(prior, mech, observed, dist);
            out[i] = {s.expected_loss, s.entropy_bits};
        });
    }
    errors.rethrow();
    return out;
}

}  // namespace leakage::kernels::omp
