#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "leakage/rng.hpp"

using leakage::derive_seed;
using leakage::Rng;

TEST(Rng, SameSeedSameStream) {
    Rng a(99), b(99);
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(a(), b());
}

TEST(Rng, UniformInUnitInterval) {
    Rng r(1);
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    // Var of U(0,1) is 1/12.
    EXPECT_NEAR(sum / n, 0.5, 3.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(Rng, DerivedSeedsAreDistinct) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t base : {0ULL, 1ULL, 2ULL}) {
        for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(base, i));
    }
    EXPECT_EQ(seen.size(), 3000u);
    static_assert(derive_seed(5, 6) == derive_seed(5, 6));
}
