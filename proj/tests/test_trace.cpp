#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "leakage/error.hpp"
#include "leakage/fixture.hpp"
#include "leakage/trace.hpp"
#include "oracles.hpp"

using namespace leakage;
using namespace leakage::trace;

namespace {

const Window kWin{0, 10};

MessageTrace tr(Ticks t, TraceKind kind = TraceKind::real) { return MessageTrace(kWin, std::move(t), kind); }

TracePrior prior_of(std::vector<std::pair<Ticks, double>> entries, Window w = kWin) {
    std::vector<TracePrior::Entry> support;
    for (auto& [t, p] : entries) support.push_back({MessageTrace(w, t), p});
    return TracePrior(w, std::move(support));
}

std::vector<std::string> fixture_paths() {
    std::vector<std::string> out;
    for (const auto& e : std::filesystem::directory_iterator(LEAKAGE_FIXTURE_DIR)) {
        if (e.path().extension() == ".json") out.push_back(e.path().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Bitmask over the distinct ticks the fixture can ever emit.
struct Universe {
    std::vector<Tick> ticks;
    unsigned mask(const Ticks& t) const {
        unsigned m = 0;
        for (Tick x : t) m |= 1u << (std::find(ticks.begin(), ticks.end(), x) - ticks.begin());
        return m;
    }
};

// q(x|r) for a Bernoulli fill written out from its definition.
oracle::Joint bernoulli_joint(const Fixture& f, Universe& u) {
    const auto& m = std::get<mechanism::BernoulliFill>(f.mechanism.kind());
    std::set<Tick> all(m.slots.begin(), m.slots.end());
    for (const auto& e : f.prior.support()) all.insert(e.trace.ticks().begin(), e.trace.ticks().end());
    u.ticks.assign(all.begin(), all.end());

    oracle::Joint j;
    for (const auto& e : f.prior.support()) {
        const unsigned r = u.mask(e.trace.ticks());
        j.prior[r] = e.p;
        const unsigned free = u.mask(m.slots) & ~r;
        const int n_free = oracle::popcount(free);
        for (unsigned sub = 0; sub < (1u << u.ticks.size()); ++sub) {
            if ((sub & ~free) != 0) continue;
            const int k = oracle::popcount(sub);
            j.q[r][r | sub] = std::pow(m.p, k) * std::pow(1.0 - m.p, n_free - k);
        }
    }
    return j;
}

}  // namespace

TEST(MessageTrace, RejectsUnsortedOrOutOfWindow) {
    EXPECT_THROW(tr({3, 2}), ConfigError);
    EXPECT_THROW(tr({2, 2}), ConfigError);
    EXPECT_THROW(tr({11}), ConfigError);
    EXPECT_THROW(tr({-1}), ConfigError);
    EXPECT_NO_THROW(tr({0, 10}));
}

TEST(MessageTrace, ObservedIsUnionOfRealAndDummy) {
    auto x = MessageTrace::observed(tr({1, 5}), tr({3, 9}, TraceKind::dummy));
    EXPECT_EQ(x.ticks(), (Ticks{1, 3, 5, 9}));
    EXPECT_EQ(x.kind(), TraceKind::observed);
    EXPECT_TRUE(tr({1, 5}).subset_of(x));
    EXPECT_FALSE(tr({2}).subset_of(x));
    EXPECT_THROW(MessageTrace::observed(tr({1}), tr({1}, TraceKind::dummy)), ConfigError);
}

TEST(MessageTrace, SelectUsesBitOrder) {
    auto x = tr({1, 4, 7});
    EXPECT_EQ(x.select(0b101, TraceKind::real).ticks(), (Ticks{1, 7}));
    EXPECT_TRUE(x.select(0, TraceKind::real).empty());
}

TEST(EventSet, ValidatesBoundsAndExplainsMessages) {
    EXPECT_THROW(EventSet(0, 10, {{5, 4}}), ConfigError);
    EXPECT_THROW(EventSet(0, 10, {{-1, 4}}), ConfigError);
    EXPECT_THROW(EventSet(0, 10, {{2, 11}}), ConfigError);
    EventSet ev(0, 10, {{3, 4}});
    TimeGrid grid;
    EXPECT_TRUE(explained_by(tr({3, 6}), ev, grid));
    EXPECT_FALSE(explained_by(tr({2}), ev, grid));
    EXPECT_TRUE(explained_by(tr({}), EventSet(0, 10, {}), grid));
}

TEST(TimeGrid, RoundsToNearestTick) {
    TimeGrid g{0.5};
    EXPECT_EQ(g.to_tick(1.24), 2);
    EXPECT_EQ(g.to_tick(1.26), 3);
    EXPECT_DOUBLE_EQ(g.to_seconds(3), 1.5);
}

TEST(TracePrior, ValidatesMass) {
    EXPECT_THROW(prior_of({{{1}, 0.5}, {{2}, 0.4}}), ConfigError);
    EXPECT_THROW(prior_of({{{1}, 1.2}, {{2}, -0.2}}), ConfigError);
    EXPECT_THROW(prior_of({{{1}, 0.5}, {{1}, 0.5}}), ConfigError);
    auto p = prior_of({{{1}, 0.5}, {{2}, 0.5}, {{3}, 0.0}});
    EXPECT_EQ(p.support().size(), 2u);
    EXPECT_DOUBLE_EQ(p.mass(Ticks{3}), 0.0);
    EXPECT_DOUBLE_EQ(p.entropy_bits(), 1.0);
    EXPECT_DOUBLE_EQ(p.message_probability(2, 5), 0.5);
}

TEST(TracePrior, SamplingFollowsMasses) {
    auto p = prior_of({{{}, 0.2}, {{1}, 0.3}, {{1, 2}, 0.5}});
    Rng rng(3);
    int hits = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) hits += p.sample(rng) == Ticks{1, 2};
    EXPECT_NEAR(hits / double(n), 0.5, oracle::three_sigma_binomial(0.5, n));
}

TEST(Mechanism, MassesSumToOneAndOnlyAdd) {
    std::vector<Mechanism> mechs{
        Mechanism::identity(),
        Mechanism::fill_to({2, 5}),
        Mechanism{mechanism::BernoulliFill{0.3, {1, 2, 3, 8}}},
    };
    for (const auto& m : mechs) {
        for (const Ticks& r : {Ticks{}, Ticks{2}, Ticks{1, 9}}) {
            double total = 0.0;
            for (const auto& [x, q] : m.outcomes(r)) {
                total += q;
                EXPECT_TRUE(std::includes(x.begin(), x.end(), r.begin(), r.end())) << m.name();
                EXPECT_DOUBLE_EQ(m.probability(x, r), q);
            }
            EXPECT_NEAR(total, 1.0, 1e-12) << m.name();
            Rng rng(11);
            for (int i = 0; i < 200; ++i) {
                auto x = m.sample(r, rng);
                EXPECT_TRUE(std::includes(x.begin(), x.end(), r.begin(), r.end())) << m.name();
                EXPECT_GT(m.probability(x, r), 0.0);
            }
        }
    }
}

TEST(Mechanism, TableRowsMustContainTheirInput) {
    mechanism::Table bad;
    bad.rows.push_back({Ticks{2}, {{Ticks{3}, 1.0}}});
    EXPECT_THROW(Mechanism{bad}, ConfigError);
    mechanism::Table unnormalized;
    unnormalized.rows.push_back({Ticks{2}, {{Ticks{2}, 0.7}}});
    EXPECT_THROW(Mechanism{unnormalized}, ConfigError);
}

TEST(Distance, MetricProperties) {
    std::vector<DistanceFn> fns{DistanceFn::cardinality(), DistanceFn::anomaly_count(2, 2)};
    std::vector<Ticks> traces{{}, {1}, {0, 1}, {0, 1, 4, 5}, {3, 7, 9}};
    for (const auto& d : fns) {
        for (const auto& a : traces) {
            EXPECT_EQ(d(a, a), 0.0);
            for (const auto& b : traces) {
                EXPECT_GE(d(a, b), 0.0);
                EXPECT_EQ(d(a, b), d(b, a));
            }
        }
    }
    auto ac = DistanceFn::anomaly_count(2, 2);
    // Bins [0,2), [2,4), [4,6): {0,1,4,5} has two busy bins, {3,7,9} none.
    EXPECT_EQ(ac({0, 1, 4, 5}, {3, 7, 9}), 2.0);
    EXPECT_EQ(DistanceFn::cardinality()({1, 2, 3}, {4}), 2.0);
}

TEST(Posterior, UniformPriorWithConstantMechanismIsUniform) {
    auto prior = prior_of({{{}, 0.25}, {{1}, 0.25}, {{2}, 0.25}, {{1, 2}, 0.25}});
    auto mech = Mechanism::fill_to({1, 2});
    auto x = tr({1, 2}, TraceKind::observed);
    for (const auto& row : posterior_table(prior, mech, x)) EXPECT_NEAR(row.p, 0.25, 1e-15);
}

TEST(Posterior, IdentityMechanismIsAPointMass) {
    auto prior = prior_of({{{1}, 0.3}, {{2}, 0.3}, {{1, 2}, 0.4}});
    auto x = tr({1, 2}, TraceKind::observed);
    EXPECT_DOUBLE_EQ(posterior(prior, Mechanism::identity(), x, tr({1, 2})), 1.0);
    EXPECT_DOUBLE_EQ(posterior(prior, Mechanism::identity(), x, tr({1})), 0.0);
    EXPECT_DOUBLE_EQ(posterior(prior, Mechanism::identity(), x, tr({})), 0.0);
}

TEST(Posterior, FillToMissingDummyByHand) {
    // Subsets of {1,2}: {} and {2} have no prior mass; pi({1}) q = 0.6 and
    // pi({1,2}) q = 0.4, so the normalizer is 1.
    auto prior = prior_of({{{1}, 0.6}, {{1, 2}, 0.4}});
    auto mech = Mechanism::fill_to({1, 2});
    auto x = tr({1, 2}, TraceKind::observed);
    EXPECT_NEAR(posterior(prior, mech, x, tr({1})), 0.6, 1e-15);
    EXPECT_NEAR(posterior(prior, mech, x, tr({1, 2})), 0.4, 1e-15);
    EXPECT_EQ(posterior(prior, mech, x, tr({2})), 0.0);
    EXPECT_EQ(posterior(prior, mech, x, tr({3})), 0.0);
}

TEST(Posterior, ZeroNormalizerIsInconsistent) {
    auto prior = prior_of({{{1}, 1.0}});
    auto x = tr({2}, TraceKind::observed);
    EXPECT_THROW(posterior(prior, Mechanism::identity(), x, tr({2})), InconsistentModel);
    EXPECT_THROW(posterior_table(prior, Mechanism::identity(), x), InconsistentModel);
}

TEST(Posterior, RefusesHugeObservations) {
    Ticks many;
    for (Tick t = 0; t < 21; ++t) many.push_back(t);
    const Window w{0, 30};
    auto prior = prior_of({{many, 1.0}}, w);
    EXPECT_THROW(posterior_table(prior, Mechanism::identity(), MessageTrace(w, many)), ConfigError);
}

TEST(Posterior, MatchesBruteForceOnBernoulliFixtures) {
    for (const char* name : {"bernoulli_bursts.json", "bernoulli_cardinality.json"}) {
        auto f = load_fixture(std::string(LEAKAGE_FIXTURE_DIR) + "/" + name);
        Universe u;
        auto joint = bernoulli_joint(f, u);
        // Every reachable observation, not just the one stored in the file.
        std::set<unsigned> xs;
        for (const auto& [r, row] : joint.q)
            for (const auto& [x, q] : row) xs.insert(x);
        for (unsigned xm : xs) {
            Ticks xt;
            for (std::size_t i = 0; i < u.ticks.size(); ++i)
                if (xm & (1u << i)) xt.push_back(u.ticks[i]);
            MessageTrace x(f.window, xt, TraceKind::observed);
            const auto expect = oracle::posterior(joint, xm);
            double total = 0.0;
            for (const auto& row : posterior_table(f.prior, f.mechanism, x)) {
                const unsigned rm = u.mask(row.candidate.ticks());
                const double want = expect.contains(rm) ? expect.at(rm) : 0.0;
                EXPECT_NEAR(row.p, want, 1e-12) << name;
                total += row.p;
            }
            EXPECT_NEAR(total, 1.0, 1e-9) << name;
        }
    }
}

TEST(Posterior, NormalizedOnEveryFixture) {
    for (const auto& path : fixture_paths()) {
        auto f = load_fixture(path);
        ASSERT_TRUE(f.observed) << path;
        double total = 0.0;
        for (const auto& row : posterior_table(f.prior, f.mechanism, *f.observed)) {
            EXPECT_GE(row.p, 0.0);
            total += row.p;
        }
        EXPECT_NEAR(total, 1.0, 1e-9) << path;
    }
}

TEST(Metrics, IdentityLeaksEverything) {
    auto prior = prior_of({{{}, 0.2}, {{1}, 0.3}, {{1, 4}, 0.5}});
    auto ae = average_error(prior, Mechanism::identity(), DistanceFn::cardinality(), 1000, 1);
    auto ce = conditional_entropy(prior, Mechanism::identity(), 1000, 1);
    EXPECT_TRUE(ae.exact);
    EXPECT_EQ(ae.value, 0.0);
    EXPECT_EQ(ce.value, 0.0);
}

TEST(Metrics, GapFilledToOneMessage) {
    auto prior = prior_of({{{}, 0.5}, {{1}, 0.5}});
    auto mech = Mechanism::fill_to({1});
    EXPECT_NEAR(average_error(prior, mech, DistanceFn::cardinality(), 1000, 1).value, 0.5, 1e-15);
    EXPECT_NEAR(conditional_entropy(prior, mech, 1000, 1).value, 1.0, 1e-15);
}

TEST(Metrics, ZeroDistanceGivesZeroError) {
    auto prior = prior_of({{{}, 0.5}, {{1}, 0.25}, {{2, 3}, 0.25}});
    auto zero = DistanceFn::custom([](const Ticks&, const Ticks&) { return 0.0; });
    EXPECT_EQ(average_error_exact(prior, Mechanism::fill_to({1, 2, 3}), zero).value, 0.0);
}

TEST(Metrics, UniformOverFourSubsetsIsTwoBits) {
    auto prior = prior_of({{{}, 0.25}, {{1}, 0.25}, {{2}, 0.25}, {{1, 2}, 0.25}});
    EXPECT_NEAR(conditional_entropy_exact(prior, Mechanism::fill_to({1, 2})).value, 2.0, 1e-15);
}

TEST(Metrics, TieBreakPicksLexicographicallySmallest) {
    auto prior = prior_of({{{}, 0.5}, {{1}, 0.5}});
    auto s = summarize_observation(prior, Mechanism::fill_to({1}), Ticks{1}, nullptr);
    EXPECT_NEAR(s.entropy_bits, 1.0, 1e-15);
    auto card = DistanceFn::cardinality();
    auto with_guess = summarize_observation(prior, Mechanism::fill_to({1}), Ticks{1}, &card);
    EXPECT_EQ(with_guess.best_guess, Ticks{});
}

TEST(Metrics, ExactMatchesBruteForceOnBernoulliFixture) {
    auto f = load_fixture(std::string(LEAKAGE_FIXTURE_DIR) + "/bernoulli_cardinality.json");
    Universe u;
    auto [ae, ce] = oracle::metrics(bernoulli_joint(f, u));
    EXPECT_NEAR(average_error_exact(f.prior, f.mechanism, DistanceFn::cardinality()).value, ae, 1e-12);
    EXPECT_NEAR(conditional_entropy_exact(f.prior, f.mechanism).value, ce, 1e-12);
}

TEST(Metrics, BoundsOnEveryFixture) {
    for (const auto& path : fixture_paths()) {
        auto f = load_fixture(path);
        ASSERT_TRUE(enumerable(f.prior, f.mechanism)) << path;
        auto ae = average_error_exact(f.prior, f.mechanism, f.distance);
        auto ce = conditional_entropy_exact(f.prior, f.mechanism);
        EXPECT_GE(ae.value, 0.0) << path;
        EXPECT_LE(ce.value, f.prior.entropy_bits() + 1e-12) << path;
        EXPECT_GE(ce.value, -1e-15) << path;
    }
}

TEST(Metrics, MonteCarloAgreesWithEnumeration) {
    for (const auto& path : fixture_paths()) {
        auto f = load_fixture(path);
        auto ae_exact = average_error_exact(f.prior, f.mechanism, f.distance);
        auto ce_exact = conditional_entropy_exact(f.prior, f.mechanism);
        auto ae_mc = average_error_mc(f.prior, f.mechanism, f.distance, 100000, 17);
        auto ce_mc = conditional_entropy_mc(f.prior, f.mechanism, 100000, 18);
        EXPECT_LE(std::abs(ae_mc.value - ae_exact.value), 3.0 * ae_mc.std_error + 1e-9) << path;
        EXPECT_LE(std::abs(ce_mc.value - ce_exact.value), 3.0 * ce_mc.std_error + 1e-9) << path;
        EXPECT_FALSE(ae_mc.exact);
    }
}

TEST(Metrics, MonteCarloIsSeedDeterministic) {
    auto f = load_fixture(std::string(LEAKAGE_FIXTURE_DIR) + "/bernoulli_bursts.json");
    auto a = conditional_entropy_mc(f.prior, f.mechanism, 5000, 9);
    auto b = conditional_entropy_mc(f.prior, f.mechanism, 5000, 9);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.std_error, b.std_error);
}

TEST(Metrics, LargeSupportFallsBackToMonteCarlo) {
    Ticks slots;
    for (Tick t = 0; t < 16; ++t) slots.push_back(t);
    const Window w{0, 20};
    auto prior = prior_of({{{}, 0.5}, {{3}, 0.5}}, w);
    Mechanism mech{mechanism::BernoulliFill{0.5, slots}};
    EXPECT_FALSE(enumerable(prior, mech));
    auto ce = conditional_entropy(prior, mech, 2000, 5);
    EXPECT_FALSE(ce.exact);
    EXPECT_EQ(ce.samples, 2000u);
    EXPECT_THROW(conditional_entropy_exact(prior, mech), ConfigError);
}
