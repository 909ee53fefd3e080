#pragma once

// Flat key/value configuration with TOML-like syntax:
//
//   seed = 7
//   [traffic]
//   S = 10
//   lambda = 1.0
//   [experiment]
//   anomaly_rates = [0.05, 0.10]
//
// Section headers prefix the following keys ("traffic.S"). Values are numbers,
// booleans, quoted strings or flat lists of those.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace leakage {

inline constexpr std::string_view kVersion = "0.1.0";

class Config {
public:
    static Config parse(std::istream& in, const std::string& origin = "<config>");
    static Config load(const std::string& path);

    // "section.key=value" as given on the command line.
    void set_override(std::string_view assignment);
    void set(const std::string& key, const std::string& raw_value);

    bool has(const std::string& key) const { return values_.contains(key); }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
    std::optional<std::string> raw(const std::string& key) const;

    // Canonical "key = value" lines sorted by key.
    std::string canonical() const;
    // FNV-1a over canonical().
    std::uint64_t hash() const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;  // raw value text, strings unquoted
};

}  // namespace leakage
