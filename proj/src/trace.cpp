#include "leakage/trace.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iterator>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

#include "leakage/error.hpp"
#include "leakage/kernels.hpp"

namespace leakage::trace {

namespace {

constexpr double kMassTolerance = 1e-9;

bool strictly_increasing(const Ticks& ticks) {
    return std::adjacent_find(ticks.begin(), ticks.end(), std::greater_equal<>{}) == ticks.end();
}

bool contains_all(const Ticks& outer, const Ticks& inner) {
    return std::includes(outer.begin(), outer.end(), inner.begin(), inner.end());
}

Ticks merge_sets(const Ticks& a, const Ticks& b) {
    Ticks out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

Ticks sorted_unique(Ticks ticks) {
    std::sort(ticks.begin(), ticks.end());
    ticks.erase(std::unique(ticks.begin(), ticks.end()), ticks.end());
    return ticks;
}

Ticks select_bits(const Ticks& ticks, std::uint64_t mask) {
    Ticks out;
    for (std::size_t i = 0; i < ticks.size(); ++i) {
        if (mask >> i & 1U) out.push_back(ticks[i]);
    }
    return out;
}

std::string describe(const Ticks& ticks) {
    std::ostringstream os;
    os << '{';
    for (std::size_t i = 0; i < ticks.size(); ++i) os << (i ? "," : "") << ticks[i];
    os << '}';
    return os.str();
}

}  // namespace

Tick TimeGrid::to_tick(double seconds) const {
    if (!(tick_seconds > 0.0)) throw ConfigError("tick must be positive");
    return static_cast<Tick>(std::llround(seconds / tick_seconds));
}

EventSet::EventSet(double window_start, double window_end, std::vector<Event> events)
    : window_start_(window_start), window_end_(window_end), events_(std::move(events)) {
    if (window_start_ > window_end_) throw ConfigError("event window start after end");
    for (const auto& e : events_) {
        if (e.t0 > e.t1) throw ConfigError("event ends before it starts");
        if (e.t0 < window_start_ || e.t1 > window_end_) throw ConfigError("event outside its window");
    }
    std::sort(events_.begin(), events_.end(),
              [](const Event& a, const Event& b) { return std::tie(a.t0, a.t1) < std::tie(b.t0, b.t1); });
}

MessageTrace::MessageTrace(Window window, Ticks ticks, TraceKind kind)
    : window_(window), ticks_(std::move(ticks)), kind_(kind) {
    if (window_.begin > window_.end) throw ConfigError("trace window start after end");
    if (!strictly_increasing(ticks_)) throw ConfigError("trace timestamps must be strictly increasing");
    if (!ticks_.empty() && (!window_.contains(ticks_.front()) || !window_.contains(ticks_.back())))
        throw ConfigError("trace timestamp outside window");
}

MessageTrace MessageTrace::observed(const MessageTrace& real, const MessageTrace& dummy) {
    if (!(real.window() == dummy.window())) throw ConfigError("real and dummy traces differ in window");
    Ticks overlap;
    std::set_intersection(real.ticks().begin(), real.ticks().end(), dummy.ticks().begin(),
                          dummy.ticks().end(), std::back_inserter(overlap));
    if (!overlap.empty()) throw ConfigError("dummy message coincides with a real message");
    return MessageTrace(real.window(), merge_sets(real.ticks(), dummy.ticks()), TraceKind::observed);
}

bool MessageTrace::subset_of(const MessageTrace& other) const {
    return contains_all(other.ticks_, ticks_);
}

MessageTrace MessageTrace::select(std::uint64_t mask, TraceKind kind) const {
    return MessageTrace(window_, select_bits(ticks_, mask), kind);
}

bool explained_by(const MessageTrace& real, const EventSet& events, const TimeGrid& grid) {
    const auto& ev = events.events();
    // Events are sorted by start, so the earliest start decides.
    return std::all_of(real.ticks().begin(), real.ticks().end(), [&](Tick r) {
        return !ev.empty() && ev.front().t0 <= grid.to_seconds(r);
    });
}

TracePrior::TracePrior(Window window, std::vector<Entry> support) : window_(window) {
    double total = 0.0;
    for (auto& entry : support) {
        if (!std::isfinite(entry.p) || entry.p < 0.0) throw ConfigError("prior mass must be non-negative");
        if (!(entry.trace.window() == window_)) throw ConfigError("prior trace window differs from prior window");
        total += entry.p;
        if (entry.p > 0.0) support_.push_back(std::move(entry));
    }
    if (std::abs(total - 1.0) > kMassTolerance) {
        std::ostringstream os;
        os << "prior masses sum to " << total << ", expected 1";
        throw ConfigError(os.str());
    }
    std::sort(support_.begin(), support_.end(),
              [](const Entry& a, const Entry& b) { return a.trace.ticks() < b.trace.ticks(); });
    for (std::size_t i = 1; i < support_.size(); ++i) {
        if (support_[i - 1].trace.ticks() == support_[i].trace.ticks())
            throw ConfigError("prior lists trace " + describe(support_[i].trace.ticks()) + " twice");
    }
    cumulative_.reserve(support_.size());
    double acc = 0.0;
    for (const auto& entry : support_) cumulative_.push_back(acc += entry.p);
}

double TracePrior::mass(const Ticks& ticks) const {
    auto it = std::lower_bound(support_.begin(), support_.end(), ticks,
                               [](const Entry& e, const Ticks& t) { return e.trace.ticks() < t; });
    return it != support_.end() && it->trace.ticks() == ticks ? it->p : 0.0;
}

double TracePrior::entropy_bits() const {
    double h = 0.0;
    for (const auto& entry : support_) h -= entry.p * std::log2(entry.p);
    return h;
}

double TracePrior::message_probability(Tick t0, Tick t1) const {
    double p = 0.0;
    for (const auto& entry : support_) {
        const auto& ticks = entry.trace.ticks();
        auto it = std::lower_bound(ticks.begin(), ticks.end(), t0);
        if (it != ticks.end() && *it <= t1) p += entry.p;
    }
    return p;
}

const Ticks& TracePrior::sample(Rng& rng) const {
    const double u = rng.uniform() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                                           support_.size() - 1);
    return support_[idx].trace.ticks();
}

// ---------------------------------------------------------------------------

namespace {

void check_table(mechanism::Table& table) {
    std::sort(table.rows.begin(), table.rows.end(),
              [](const auto& a, const auto& b) { return a.given < b.given; });
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        if (!strictly_increasing(row.given)) throw ConfigError("table row trace not strictly increasing");
        if (i > 0 && table.rows[i - 1].given == row.given)
            throw ConfigError("table has two rows for " + describe(row.given));
        double total = 0.0;
        for (const auto& out : row.emit) {
            if (!strictly_increasing(out.observed)) throw ConfigError("table outcome not strictly increasing");
            if (!contains_all(out.observed, row.given))
                throw ConfigError("table outcome for " + describe(row.given) + " drops a real message");
            if (!std::isfinite(out.p) || out.p < 0.0) throw ConfigError("table outcome mass must be non-negative");
            total += out.p;
        }
        if (std::abs(total - 1.0) > kMassTolerance)
            throw ConfigError("table row for " + describe(row.given) + " does not sum to 1");
    }
}

const mechanism::Table::Row* find_row(const mechanism::Table& table, const Ticks& real) {
    auto it = std::lower_bound(table.rows.begin(), table.rows.end(), real,
                               [](const auto& row, const Ticks& t) { return row.given < t; });
    return it != table.rows.end() && it->given == real ? &*it : nullptr;
}

const mechanism::Table::Row& require_row(const mechanism::Table& table, const Ticks& real) {
    if (const auto* row = find_row(table, real)) return *row;
    throw ConfigError("mechanism table has no row for real trace " + describe(real));
}

Ticks free_slots(const mechanism::BernoulliFill& m, const Ticks& real) {
    Ticks free;
    std::set_difference(m.slots.begin(), m.slots.end(), real.begin(), real.end(), std::back_inserter(free));
    return free;
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

}  // namespace

Mechanism::Mechanism(Kind kind) : kind_(std::move(kind)) {
    std::visit(overloaded{
                   [](mechanism::Identity&) {},
                   [](mechanism::FillTo& m) { m.targets = sorted_unique(std::move(m.targets)); },
                   [](mechanism::Table& m) { check_table(m); },
                   [](mechanism::BernoulliFill& m) {
                       if (!(m.p >= 0.0 && m.p <= 1.0)) throw ConfigError("bernoulli p must lie in [0, 1]");
                       m.slots = sorted_unique(std::move(m.slots));
                   },
               },
               kind_);
}

std::string Mechanism::name() const {
    return std::visit(overloaded{
                          [](const mechanism::Identity&) { return std::string("identity"); },
                          [](const mechanism::FillTo&) { return std::string("fill-to"); },
                          [](const mechanism::Table&) { return std::string("table"); },
                          [](const mechanism::BernoulliFill&) { return std::string("bernoulli"); },
                      },
                      kind_);
}

double Mechanism::probability(const Ticks& observed, const Ticks& real) const {
    if (!contains_all(observed, real)) return 0.0;
    return std::visit(
        overloaded{
            [&](const mechanism::Identity&) { return observed == real ? 1.0 : 0.0; },
            [&](const mechanism::FillTo& m) { return merge_sets(real, m.targets) == observed ? 1.0 : 0.0; },
            [&](const mechanism::Table& m) {
                const auto* row = find_row(m, real);
                if (row == nullptr) return 0.0;
                for (const auto& out : row->emit) {
                    if (out.observed == observed) return out.p;
                }
                return 0.0;
            },
            [&](const mechanism::BernoulliFill& m) {
                Ticks dummies;
                std::set_difference(observed.begin(), observed.end(), real.begin(), real.end(),
                                    std::back_inserter(dummies));
                if (!contains_all(m.slots, dummies)) return 0.0;
                const auto free = free_slots(m, real);
                double q = 1.0;
                for (Tick s : free) q *= std::binary_search(dummies.begin(), dummies.end(), s) ? m.p : 1.0 - m.p;
                return q;
            },
        },
        kind_);
}

std::vector<std::pair<Ticks, double>> Mechanism::outcomes(const Ticks& real) const {
    return std::visit(
        overloaded{
            [&](const mechanism::Identity&) { return std::vector<std::pair<Ticks, double>>{{real, 1.0}}; },
            [&](const mechanism::FillTo& m) {
                return std::vector<std::pair<Ticks, double>>{{merge_sets(real, m.targets), 1.0}};
            },
            [&](const mechanism::Table& m) {
                std::vector<std::pair<Ticks, double>> out;
                for (const auto& o : require_row(m, real).emit) {
                    if (o.p > 0.0) out.emplace_back(o.observed, o.p);
                }
                return out;
            },
            [&](const mechanism::BernoulliFill& m) {
                const auto free = free_slots(m, real);
                if (free.size() > kMaxPosteriorMessages) throw ConfigError("too many bernoulli slots to enumerate");
                std::vector<std::pair<Ticks, double>> out;
                const std::uint64_t n_masks = std::uint64_t{1} << free.size();
                for (std::uint64_t mask = 0; mask < n_masks; ++mask) {
                    const auto k = std::popcount(mask);
                    const double q = std::pow(m.p, k) *
                                     std::pow(1.0 - m.p, static_cast<double>(free.size()) - k);
                    if (q > 0.0) out.emplace_back(merge_sets(real, select_bits(free, mask)), q);
                }
                return out;
            },
        },
        kind_);
}

Ticks Mechanism::sample(const Ticks& real, Rng& rng) const {
    return std::visit(overloaded{
                          [&](const mechanism::Identity&) { return real; },
                          [&](const mechanism::FillTo& m) { return merge_sets(real, m.targets); },
                          [&](const mechanism::Table& m) {
                              const auto& row = require_row(m, real);
                              const double u = rng.uniform();
                              double acc = 0.0;
                              for (const auto& o : row.emit) {
                                  acc += o.p;
                                  if (u < acc && o.p > 0.0) return o.observed;
                              }
                              // u landed in rounding slack above the last cumulative mass
                              for (auto it = row.emit.rbegin(); it != row.emit.rend(); ++it) {
                                  if (it->p > 0.0) return it->observed;
                              }
                              return real;
                          },
                          [&](const mechanism::BernoulliFill& m) {
                              Ticks dummies;
                              for (Tick s : free_slots(m, real)) {
                                  if (rng.uniform() < m.p) dummies.push_back(s);
                              }
                              return merge_sets(real, dummies);
                          },
                      },
                      kind_);
}

// ---------------------------------------------------------------------------

DistanceFn DistanceFn::cardinality() {
    return DistanceFn(DistanceMode::cardinality, [](const Ticks& a, const Ticks& b) {
        return std::abs(static_cast<double>(a.size()) - static_cast<double>(b.size()));
    });
}

DistanceFn DistanceFn::anomaly_count(Tick bin, int threshold) {
    if (bin <= 0) throw ConfigError("anomaly bin width must be positive");
    if (threshold < 1) throw ConfigError("anomaly threshold must be at least 1");
    auto count = [bin, threshold](const Ticks& ticks) {
        auto bin_of = [bin](Tick t) { return t >= 0 ? t / bin : -((-t + bin - 1) / bin); };
        int anomalies = 0;
        std::size_t i = 0;
        while (i < ticks.size()) {
            const Tick b = bin_of(ticks[i]);
            int in_bin = 0;
            for (; i < ticks.size() && bin_of(ticks[i]) == b; ++i) ++in_bin;
            if (in_bin >= threshold) ++anomalies;
        }
        return anomalies;
    };
    return DistanceFn(DistanceMode::anomaly_count, [count](const Ticks& a, const Ticks& b) {
        return std::abs(static_cast<double>(count(a) - count(b)));
    });
}

DistanceFn DistanceFn::custom(Fn fn) { return DistanceFn(DistanceMode::custom, std::move(fn)); }

// ---------------------------------------------------------------------------

namespace {

struct Contribution {
    const Ticks* real;
    double weight;  // pi(R) q(X|R)
};

std::vector<Contribution> contributions(const TracePrior& prior, const Mechanism& mech, const Ticks& observed) {
    std::vector<Contribution> out;
    for (const auto& entry : prior.support()) {
        const auto& r = entry.trace.ticks();
        if (r.size() > observed.size() || !contains_all(observed, r)) continue;
        const double w = entry.p * mech.probability(observed, r);
        if (w > 0.0) out.push_back({&r, w});
    }
    return out;
}

void require_posterior_size(std::size_t n) {
    if (n > kMaxPosteriorMessages)
        throw ConfigError("observed trace has " + std::to_string(n) + " messages; posterior enumeration supports at most " +
                          std::to_string(kMaxPosteriorMessages));
}

}  // namespace

double posterior(const TracePrior& prior, const Mechanism& mech, const MessageTrace& observed,
                 const MessageTrace& candidate) {
    require_posterior_size(observed.size());
    if (!candidate.subset_of(observed)) return 0.0;
    const auto parts = contributions(prior, mech, observed.ticks());
    double normalizer = 0.0;
    for (const auto& c : parts) normalizer += c.weight;
    if (!(normalizer > 0.0))
        throw InconsistentModel("no real trace inside observation " + describe(observed.ticks()) +
                                " has positive prior and mechanism mass");
    return prior.mass(candidate) * mech.probability(observed.ticks(), candidate.ticks()) / normalizer;
}

std::vector<PosteriorRow> posterior_table(const TracePrior& prior, const Mechanism& mech,
                                          const MessageTrace& observed) {
    require_posterior_size(observed.size());
    const auto parts = contributions(prior, mech, observed.ticks());
    double normalizer = 0.0;
    for (const auto& c : parts) normalizer += c.weight;
    if (!(normalizer > 0.0))
        throw InconsistentModel("no real trace inside observation " + describe(observed.ticks()) +
                                " has positive prior and mechanism mass");

    std::vector<PosteriorRow> rows;
    const std::uint64_t n_masks = std::uint64_t{1} << observed.size();
    rows.reserve(n_masks);
    for (std::uint64_t mask = 0; mask < n_masks; ++mask) {
        auto candidate = observed.select(mask, TraceKind::real);
        double w = 0.0;
        for (const auto& c : parts) {
            if (*c.real == candidate.ticks()) {
                w = c.weight;
                break;
            }
        }
        rows.push_back({std::move(candidate), w / normalizer});
    }
    return rows;
}

ObservationSummary summarize_observation(const TracePrior& prior, const Mechanism& mech, const Ticks& observed,
                                         const DistanceFn* dist) {
    const auto parts = contributions(prior, mech, observed);
    ObservationSummary s;
    for (const auto& c : parts) s.joint_mass += c.weight;
    if (!(s.joint_mass > 0.0))
        throw InconsistentModel("observation " + describe(observed) + " has zero probability under the model");

    for (const auto& c : parts) {
        const double p = c.weight / s.joint_mass;
        s.entropy_bits -= p * std::log2(p);
    }
    if (dist == nullptr) return s;

    require_posterior_size(observed.size());
    const std::uint64_t n_masks = std::uint64_t{1} << observed.size();
    bool have = false;
    for (std::uint64_t mask = 0; mask < n_masks; ++mask) {
        Ticks guess = select_bits(observed, mask);
        double loss = 0.0;
        for (const auto& c : parts) loss += c.weight / s.joint_mass * (*dist)(*c.real, guess);
        const double tol = 1e-12 * std::max(1.0, std::abs(s.expected_loss));
        const bool better = !have || loss < s.expected_loss - tol ||
                            (std::abs(loss - s.expected_loss) <= tol && guess < s.best_guess);
        if (better) {
            s.expected_loss = loss;
            s.best_guess = std::move(guess);
            have = true;
        }
    }
    return s;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kMaxExactOutcomes = 1'000'000;

std::map<Ticks, double> reachable_observations(const TracePrior& prior, const Mechanism& mech) {
    std::map<Ticks, double> joint;
    for (const auto& entry : prior.support()) {
        for (auto& [x, q] : mech.outcomes(entry.trace.ticks())) joint[x] += entry.p * q;
    }
    return joint;
}

Estimate exact_metric(const TracePrior& prior, const Mechanism& mech, const DistanceFn* dist) {
    if (!enumerable(prior, mech)) throw ConfigError("model too large for exact enumeration");
    Estimate est;
    est.exact = true;
    for (const auto& [x, mass] : reachable_observations(prior, mech)) {
        const auto s = summarize_observation(prior, mech, x, dist);
        est.value += s.joint_mass * (dist != nullptr ? s.expected_loss : s.entropy_bits);
        ++est.samples;
    }
    return est;
}

Estimate mc_metric(const TracePrior& prior, const Mechanism& mech, const DistanceFn* dist, std::size_t samples,
                   Seed seed) {
    if (samples == 0) throw ConfigError("sample budget must be at least 1");
    const auto draws = kernels::omp::trace_samples(prior, mech, dist, samples, seed);
    double sum = 0.0;
    for (const auto& d : draws) sum += dist != nullptr ? d.loss : d.entropy_bits;
    const double mean = sum / static_cast<double>(samples);
    double ss = 0.0;
    for (const auto& d : draws) {
        const double v = (dist != nullptr ? d.loss : d.entropy_bits) - mean;
        ss += v * v;
    }
    Estimate est;
    est.value = mean;
    est.samples = samples;
    est.std_error = samples > 1 ? std::sqrt(ss / static_cast<double>(samples - 1) / static_cast<double>(samples)) : 0.0;
    return est;
}

}  // namespace

bool enumerable(const TracePrior& prior, const Mechanism& mech) {
    std::size_t total = 0;
    for (const auto& entry : prior.support()) {
        const auto& r = entry.trace.ticks();
        std::size_t max_size = 0;
        std::size_t n_outcomes = 1;
        std::visit(overloaded{
                       [&](const mechanism::Identity&) { max_size = r.size(); },
                       [&](const mechanism::FillTo& m) { max_size = merge_sets(r, m.targets).size(); },
                       [&](const mechanism::Table& m) {
                           const auto& row = require_row(m, r);
                           n_outcomes = row.emit.size();
                           for (const auto& o : row.emit) max_size = std::max(max_size, o.observed.size());
                       },
                       [&](const mechanism::BernoulliFill& m) {
                           const auto free = free_slots(m, r);
                           max_size = r.size() + free.size();
                           n_outcomes = free.size() >= 63 ? kMaxExactOutcomes + 1 : std::size_t{1} << free.size();
                       },
                   },
                   mech.kind());
        if (max_size > kMaxExactMessages) return false;
        total += n_outcomes;
        if (total > kMaxExactOutcomes) return false;
    }
    return true;
}

Estimate average_error_exact(const TracePrior& prior, const Mechanism& mech, const DistanceFn& dist) {
    return exact_metric(prior, mech, &dist);
}

Estimate average_error_mc(const TracePrior& prior, const Mechanism& mech, const DistanceFn& dist, std::size_t samples,
                          Seed seed) {
    return mc_metric(prior, mech, &dist, samples, seed);
}

Estimate average_error(const TracePrior& prior, const Mechanism& mech, const DistanceFn& dist, std::size_t samples,
                       Seed seed) {
    if (samples == 0) throw ConfigError("sample budget must be at least 1");
    return enumerable(prior, mech) ? average_error_exact(prior, mech, dist)
                                   : average_error_mc(prior, mech, dist, samples, seed);
}

Estimate conditional_entropy_exact(const TracePrior& prior, const Mechanism& mech) {
    return exact_metric(prior, mech, nullptr);
}

Estimate conditional_entropy_mc(const TracePrior& prior, const Mechanism& mech, std::size_t samples, Seed seed) {
    return mc_metric(prior, mech, nullptr, samples, seed);
}

Estimate conditional_entropy(const TracePrior& prior, const Mechanism& mech, std::size_t samples, Seed seed) {
    if (samples == 0) throw ConfigError("sample budget must be at least 1");
    return enumerable(prior, mech) ? conditional_entropy_exact(prior, mech)
                                   : conditional_entropy_mc(prior, mech, samples, seed);
}

}  // namespace leakage::trace
