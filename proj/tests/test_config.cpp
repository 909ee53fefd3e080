#include <gtest/gtest.h>

#include <sstream>

#include "leakage/config.hpp"
#include "leakage/error.hpp"

using leakage::Config;
using leakage::ConfigError;

namespace {

Config parse(const std::string& text) {
    std::istringstream in(text);
    return Config::parse(in, "test.toml");
}

}  // namespace

TEST(Config, SectionsAndTypes) {
    auto c = parse(R"(
seed = 7   # trailing comment
[traffic]
S = 10
lambda = 1.5
[attacker]
mode = "chi-square"
hash = "a#b"
[experiment]
anomaly_rates = [0.05, 0.1, 0.15]
full = true
)");
    EXPECT_EQ(c.get_u64("seed", 0), 7u);
    EXPECT_EQ(c.get_int("traffic.S", 0), 10);
    EXPECT_DOUBLE_EQ(c.get_double("traffic.lambda", 0), 1.5);
    EXPECT_EQ(c.get_string("attacker.mode", ""), "chi-square");
    EXPECT_EQ(c.get_string("attacker.hash", ""), "a#b");
    EXPECT_EQ(c.get_doubles("experiment.anomaly_rates", {}), (std::vector<double>{0.05, 0.1, 0.15}));
    EXPECT_TRUE(c.get_bool("experiment.full", false));
    EXPECT_EQ(c.get_double("missing", 3.0), 3.0);
    EXPECT_FALSE(c.has("missing"));
}

TEST(Config, Errors) {
    EXPECT_THROW(parse("novalue\n"), ConfigError);
    EXPECT_THROW(parse("a = 1\na = 2\n"), ConfigError);
    EXPECT_THROW(parse("[open\n"), ConfigError);
    EXPECT_THROW(parse("s = \"unterminated\n"), ConfigError);
    EXPECT_THROW(parse("l = [1, 2\n"), ConfigError);
    EXPECT_THROW(parse("bad key = 1\n"), ConfigError);
    auto c = parse("x = abc\nf = 1.5\nb = yes\n");
    EXPECT_THROW(c.get_double("x", 0), ConfigError);
    EXPECT_THROW(c.get_int("f", 0), ConfigError);
    EXPECT_THROW(c.get_bool("b", false), ConfigError);
    EXPECT_THROW(c.get_u64("f", 0), ConfigError);
    try {
        parse("ok = 1\n\noops\n");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("test.toml:3"), std::string::npos);
    }
    EXPECT_THROW(Config::load("/nonexistent.toml"), ConfigError);
}

TEST(Config, OverridesAndHash) {
    auto a = parse("[traffic]\nS = 10\n");
    auto b = parse("[traffic]\nS = 10\n");
    EXPECT_EQ(a.hash(), b.hash());
    b.set_override("traffic.S=20");
    EXPECT_EQ(b.get_int("traffic.S", 0), 20);
    EXPECT_NE(a.hash(), b.hash());
    b.set_override("traffic.S = 10");
    EXPECT_EQ(a.hash(), b.hash());
    EXPECT_EQ(a.canonical(), "traffic.S = 10\n");
    EXPECT_THROW(b.set_override("nothing"), ConfigError);
}
