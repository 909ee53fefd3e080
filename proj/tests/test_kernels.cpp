#include <gtest/gtest.h>

#include "leakage/fixture.hpp"
#include "leakage/kernels.hpp"

using namespace leakage;
namespace ks = leakage::kernels::serial;
namespace ko = leakage::kernels::omp;

namespace {

void expect_same(const traffic::Run& a, const traffic::Run& b) {
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].counts, b[i].counts);
        EXPECT_EQ(a[i].dummy_counts, b[i].dummy_counts);
        EXPECT_EQ(a[i].anomaly_slot, b[i].anomaly_slot);
        EXPECT_EQ(a[i].obf_action, b[i].obf_action);
    }
}

}  // namespace

TEST(Kernels, GenerateIsIdentical) {
    traffic::IntervalModel m{10, 1.5, 12.0, 0.35};
    expect_same(ks::generate(m, 20000, 3), ko::generate(m, 20000, 3));
}

TEST(Kernels, ObfuscateIsIdentical) {
    traffic::IntervalModel m{10, 1.0, 20.0, 0.4};
    auto c = obfuscator::costs(m);
    obfuscator::Strategy s;
    s.waterfill_prob = 0.6;
    s.fake_prob = 0.3;
    auto a = ks::generate(m, 20000, 4);
    auto b = a;
    ks::obfuscate(a, s, {0.8, 0.9}, c, 5);
    ko::obfuscate(b, s, {0.8, 0.9}, c, 5);
    expect_same(a, b);
}

TEST(Kernels, DispersionsVerdictsAndGuessesAreIdentical) {
    traffic::IntervalModel m{10, 1.0, 8.0, 0.3};
    auto run = ko::generate(m, 20000, 6);
    auto da = ks::dispersions(run);
    auto db = ko::dispersions(run);
    ASSERT_EQ(da.size(), db.size());
    for (std::size_t i = 0; i < da.size(); ++i) EXPECT_EQ(da[i].dispersion, db[i].dispersion);

    for (auto mode : {attacker::DetectorMode::chi_square, attacker::DetectorMode::idealized}) {
        attacker::DetectorConfig cfg{mode, 0.05, 0.3};
        auto va = ks::verdicts(run, cfg);
        auto vb = ko::verdicts(run, cfg);
        ASSERT_EQ(va.size(), vb.size());
        for (std::size_t i = 0; i < va.size(); ++i) {
            EXPECT_EQ(va[i].flagged, vb[i].flagged);
            EXPECT_EQ(va[i].statistic, vb[i].statistic);
            va[i].posterior_anomaly = vb[i].posterior_anomaly = va[i].flagged ? 0.7 : 0.1;
        }
        EXPECT_EQ(ks::guesses(va, cfg, 7), ko::guesses(vb, cfg, 7));
    }
}

TEST(Kernels, TraceSamplesAreIdentical) {
    auto f = trace::load_fixture(std::string(LEAKAGE_FIXTURE_DIR) + "/bernoulli_bursts.json");
    auto a = ks::trace_samples(f.prior, f.mechanism, &f.distance, 5000, 8);
    auto b = ko::trace_samples(f.prior, f.mechanism, &f.distance, 5000, 8);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].loss, b[i].loss);
        EXPECT_EQ(a[i].entropy_bits, b[i].entropy_bits);
    }
}

TEST(Kernels, ErrorsInsideParallelLoopsPropagate) {
    traffic::Run run(100);
    for (auto& obs : run) {
        obs.counts.assign(1, 0);
        obs.dummy_counts.assign(1, 0);
    }
    EXPECT_THROW(ko::dispersions(run), std::exception);
    EXPECT_THROW(ks::dispersions(run), std::exception);
}
