#include "leakage/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "leakage/error.hpp"

namespace leakage {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

// Drops a trailing "# comment" that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        else if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

bool valid_key(std::string_view key) {
    if (key.empty()) return false;
    for (char c : key) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) return false;
    }
    return key.front() != '.' && key.back() != '.';
}

std::string normalize_value(const std::string& raw, const std::string& where) {
    auto v = trim(raw);
    if (v.empty()) throw ConfigError(where + ": missing value");
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"') throw ConfigError(where + ": unterminated string");
        return v.substr(1, v.size() - 2);
    }
    if (v.front() == '[' && v.back() != ']') throw ConfigError(where + ": unterminated list");
    return v;
}

double parse_number(const std::string& text, const std::string& key) {
    const auto s = trim(text);
    double value = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc{} || ptr != end) throw ConfigError(key + ": expected a number, got \"" + s + "\"");
    return value;
}

}  // namespace

Config Config::parse(std::istream& in, const std::string& origin) {
    Config cfg;
    std::string section;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto where = origin + ":" + std::to_string(lineno);
        const auto text = trim(strip_comment(line));
        if (text.empty()) continue;
        if (text.front() == '[') {
            if (text.back() != ']') throw ConfigError(where + ": malformed section header");
            section = trim(std::string_view(text).substr(1, text.size() - 2));
            if (!valid_key(section)) throw ConfigError(where + ": bad section name \"" + section + "\"");
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        const auto key = trim(std::string_view(text).substr(0, eq));
        if (!valid_key(key)) throw ConfigError(where + ": bad key \"" + key + "\"");
        const auto full = section.empty() ? key : section + "." + key;
        if (cfg.values_.contains(full)) throw ConfigError(where + ": duplicate key \"" + full + "\"");
        cfg.values_[full] = normalize_value(text.substr(eq + 1), where);
    }
    return cfg;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    return parse(in, path);
}

void Config::set_override(std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) throw ConfigError("override must look like key=value: " + std::string(assignment));
    const auto key = trim(assignment.substr(0, eq));
    if (!valid_key(key)) throw ConfigError("bad override key \"" + key + "\"");
    values_[key] = normalize_value(std::string(assignment.substr(eq + 1)), "override " + key);
}

void Config::set(const std::string& key, const std::string& raw_value) {
    if (!valid_key(key)) throw ConfigError("bad key \"" + key + "\"");
    values_[key] = raw_value;
}

std::optional<std::string> Config::raw(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    return raw(key).value_or(fallback);
}

double Config::get_double(const std::string& key, double fallback) const {
    auto v = raw(key);
    return v ? parse_number(*v, key) : fallback;
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
    auto v = raw(key);
    if (!v) return fallback;
    const double d = parse_number(*v, key);
    if (d != std::floor(d) || std::abs(d) > 9.0e15) throw ConfigError(key + ": expected an integer");
    return static_cast<std::int64_t>(d);
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
    auto v = raw(key);
    if (!v) return fallback;
    const auto s = trim(*v);
    std::uint64_t value = 0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc{} || ptr != end) throw ConfigError(key + ": expected an unsigned integer");
    return value;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    auto v = raw(key);
    if (!v) return fallback;
    if (*v == "true") return true;
    if (*v == "false") return false;
    throw ConfigError(key + ": expected true or false");
}

std::vector<double> Config::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
    auto v = raw(key);
    if (!v) return fallback;
    std::string body = *v;
    if (body.front() == '[') body = body.substr(1, body.size() - 2);
    std::vector<double> out;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (trim(item).empty()) continue;
        out.push_back(parse_number(item, key));
    }
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
}

std::string Config::canonical() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
}

std::uint64_t Config::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace leakage
