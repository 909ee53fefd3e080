#pragma once

// Continuous-time trace model on a discrete tick grid: events, real/dummy/
// observed message traces, the attacker prior over real traces, obfuscation
// mechanisms q(X|R), the Bayesian posterior over real traces hidden in an
// observation, and the average-error / conditional-entropy privacy metrics.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "leakage/rng.hpp"

namespace leakage::trace {

using Tick = std::int64_t;
using Ticks = std::vector<Tick>;

struct TimeGrid {
    double tick_seconds = 1.0;

    Tick to_tick(double seconds) const;
    double to_seconds(Tick tick) const { return static_cast<double>(tick) * tick_seconds; }
};

struct Window {
    Tick begin = 0;
    Tick end = 0;

    bool contains(Tick t) const { return begin <= t && t <= end; }
    friend bool operator==(const Window&, const Window&) = default;
};

struct Event {
    double t0 = 0.0;
    double t1 = 0.0;
};

class EventSet {
public:
    EventSet(double window_start, double window_end, std::vector<Event> events);

    double window_start() const { return window_start_; }
    double window_end() const { return window_end_; }
    const std::vector<Event>& events() const { return events_; }

private:
    double window_start_;
    double window_end_;
    std::vector<Event> events_;
};

enum class TraceKind { real, dummy, observed };

class MessageTrace {
public:
    MessageTrace() = default;
    // Throws ConfigError unless ticks are strictly increasing inside the window.
    MessageTrace(Window window, Ticks ticks, TraceKind kind = TraceKind::real);

    // Sorted union of a real and a dummy trace over the same window.
    static MessageTrace observed(const MessageTrace& real, const MessageTrace& dummy);

    const Window& window() const { return window_; }
    const Ticks& ticks() const { return ticks_; }
    TraceKind kind() const { return kind_; }
    std::size_t size() const { return ticks_.size(); }
    bool empty() const { return ticks_.empty(); }

    bool subset_of(const MessageTrace& other) const;
    // Messages selected by the bits of `mask` (bit i keeps ticks()[i]).
    MessageTrace select(std::uint64_t mask, TraceKind kind) const;

    // Same window and same timestamps; kind is a label, not part of identity.
    friend bool operator==(const MessageTrace& a, const MessageTrace& b) {
        return a.window_ == b.window_ && a.ticks_ == b.ticks_;
    }

private:
    Window window_{};
    Ticks ticks_;
    TraceKind kind_ = TraceKind::real;
};

// Every real message has an event that started no later than it was sent.
bool explained_by(const MessageTrace& real, const EventSet& events, const TimeGrid& grid);

// Discrete attacker prior pi(R) over real traces in one window.
class TracePrior {
public:
    struct Entry {
        MessageTrace trace;
        double p = 0.0;
    };

    TracePrior(Window window, std::vector<Entry> support);

    const Window& window() const { return window_; }
    std::span<const Entry> support() const { return support_; }

    double mass(const Ticks& ticks) const;
    double mass(const MessageTrace& trace) const { return mass(trace.ticks()); }
    double entropy_bits() const;

    // Probability that at least one real message falls in [t0, t1]; the
    // trace-level counterpart of the event-form prior.
    double message_probability(Tick t0, Tick t1) const;

    const Ticks& sample(Rng& rng) const;

private:
    Window window_;
    std::vector<Entry> support_;  // sorted by ticks, zero-mass entries dropped
    std::vector<double> cumulative_;
};

namespace mechanism {

// X = R.
struct Identity {};

// X = R united with a fixed set of dummy slots.
struct FillTo {
    Ticks targets;
};

// Explicit q(X|R) rows. Each emitted X must contain its R.
struct Table {
    struct Outcome {
        Ticks observed;
        double p = 0.0;
    };
    struct Row {
        Ticks given;
        std::vector<Outcome> emit;
    };
    std::vector<Row> rows;
};

// Each candidate slot not already used by a real message carries a dummy
// independently with probability p.
struct BernoulliFill {
    double p = 0.0;
    Ticks slots;
};

}  // namespace mechanism

class Mechanism {
public:
    using Kind = std::variant<mechanism::Identity, mechanism::FillTo, mechanism::Table,
                              mechanism::BernoulliFill>;

    Mechanism() = default;
    explicit Mechanism(Kind kind);

    static Mechanism identity() { return Mechanism{mechanism::Identity{}}; }
    static Mechanism fill_to(Ticks targets) { return Mechanism{mechanism::FillTo{std::move(targets)}}; }

    const Kind& kind() const { return kind_; }
    std::string name() const;

    // q(X | R); zero whenever R is not contained in X.
    double probability(const Ticks& observed, const Ticks& real) const;
    // Every X with q(X|R) > 0, with its mass.
    std::vector<std::pair<Ticks, double>> outcomes(const Ticks& real) const;
    Ticks sample(const Ticks& real, Rng& rng) const;

private:
    Kind kind_{mechanism::Identity{}};
};

enum class DistanceMode { cardinality, anomaly_count, custom };

class DistanceFn {
public:
    using Fn = std::function<double(const Ticks&, const Ticks&)>;

    // | |R| - |R'| |
    static DistanceFn cardinality();
    // Absolute difference in the number of bins (width `bin` ticks, aligned to
    // tick 0) holding at least `threshold` messages.
    static DistanceFn anomaly_count(Tick bin, int threshold);
    static DistanceFn custom(Fn fn);

    DistanceMode mode() const { return mode_; }
    double operator()(const Ticks& a, const Ticks& b) const { return fn_(a, b); }

private:
    DistanceFn(DistanceMode mode, Fn fn) : mode_(mode), fn_(std::move(fn)) {}

    DistanceMode mode_;
    Fn fn_;
};

inline constexpr std::size_t kMaxPosteriorMessages = 20;
inline constexpr std::size_t kMaxExactMessages = 12;

struct PosteriorRow {
    MessageTrace candidate;
    double p = 0.0;
};

// p(candidate | observed). Zero when candidate is not a subset of observed.
double posterior(const TracePrior& prior, const Mechanism& mech, const MessageTrace& observed,
                 const MessageTrace& candidate);

// Posterior over every subset of `observed`, in subset-bitmask order.
std::vector<PosteriorRow> posterior_table(const TracePrior& prior, const Mechanism& mech,
                                          const MessageTrace& observed);

// What the optimal attacker concludes from one observation.
struct ObservationSummary {
    double joint_mass = 0.0;       // sum over R of pi(R) q(X|R), i.e. p(X)
    double expected_loss = 0.0;    // min over R' of E[d(R, R') | X]
    Ticks best_guess;              // lexicographically smallest minimiser
    double entropy_bits = 0.0;     // H(R | X = x)
};

ObservationSummary summarize_observation(const TracePrior& prior, const Mechanism& mech,
                                         const Ticks& observed, const DistanceFn* dist);

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;
    bool exact = false;
};

// True when every reachable observation is small enough to enumerate.
bool enumerable(const TracePrior& prior, const Mechanism& mech);

Estimate average_error_exact(const TracePrior& prior, const Mechanism& mech, const DistanceFn& dist);
Estimate average_error_mc(const TracePrior& prior, const Mechanism& mech, const DistanceFn& dist,
                          std::size_t samples, Seed seed);
// Exact when enumerable, Monte-Carlo otherwise.
Estimate average_error(const TracePrior& prior, const Mechanism& mech, const DistanceFn& dist,
                       std::size_t samples, Seed seed);

Estimate conditional_entropy_exact(const TracePrior& prior, const Mechanism& mech);
Estimate conditional_entropy_mc(const TracePrior& prior, const Mechanism& mech,
                                std::size_t samples, Seed seed);
Estimate conditional_entropy(const TracePrior& prior, const Mechanism& mech, std::size_t samples,
                             Seed seed);

}  // namespace leakage::trace
