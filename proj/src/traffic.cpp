#include "leakage/traffic.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

#include "leakage/error.hpp"
#include "leakage/kernels.hpp"

namespace leakage::traffic {

void IntervalModel::validate() const {
    if (slots < 2) throw ConfigError("model.S must be at least 2");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("model.lambda must be positive");
    if (!(intensity >= 1.0) || !std::isfinite(intensity)) throw ConfigError("model.intensity must be at least 1");
    if (!(anomaly_rate >= 0.0 && anomaly_rate <= 1.0)) throw ConfigError("model.anomaly_rate must lie in [0, 1]");
}

std::string_view to_string(ObfAction action) {
    switch (action) {
    case ObfAction::none: return "none";
    case ObfAction::waterfilled: return "waterfilled";
    case ObfAction::fake_anomaly: return "fake-anomaly";
    }
    return "none";
}

ObfAction parse_obf_action(std::string_view text) {
    if (text == "none") return ObfAction::none;
    if (text == "waterfilled") return ObfAction::waterfilled;
    if (text == "fake-anomaly") return ObfAction::fake_anomaly;
    throw DataError("unknown obfuscation action \"" + std::string(text) + "\"");
}

void IntervalObservation::validate(int slots) const {
    const auto s = static_cast<std::size_t>(slots);
    if (counts.size() != s || dummy_counts.size() != s) throw DataError("interval slot count differs from S");
    for (std::size_t i = 0; i < s; ++i) {
        if (counts[i] < 0 || dummy_counts[i] < 0 || dummy_counts[i] > counts[i])
            throw DataError("slot counts must satisfy 0 <= dummy_count <= count");
    }
    if (is_anomaly != anomaly_slot.has_value()) throw DataError("anomaly_slot present iff is_anomaly");
    if (anomaly_slot && (*anomaly_slot < 0 || *anomaly_slot >= slots)) throw DataError("anomaly_slot out of range");
}

Count IntervalObservation::total() const { return std::accumulate(counts.begin(), counts.end(), Count{0}); }

Count IntervalObservation::dummy_total() const {
    return std::accumulate(dummy_counts.begin(), dummy_counts.end(), Count{0});
}

IntervalObservation gen_interval(const IntervalModel& model, Seed seed) {
    Rng rng(seed);
    IntervalObservation obs;
    const auto s = static_cast<std::size_t>(model.slots);
    obs.counts.resize(s);
    obs.dummy_counts.assign(s, 0);

    obs.is_anomaly = rng.uniform() < model.anomaly_rate;
    if (obs.is_anomaly) {
        std::uniform_int_distribution<int> pick(0, model.slots - 1);
        obs.anomaly_slot = pick(rng);
    }
    std::poisson_distribution<Count> baseline(model.lambda);
    std::poisson_distribution<Count> anomalous(model.anomaly_lambda());
    for (std::size_t i = 0; i < s; ++i) {
        obs.counts[i] = obs.anomaly_slot == static_cast<int>(i) ? anomalous(rng) : baseline(rng);
    }
    return obs;
}

Run gen_run(const IntervalModel& model, std::size_t n_intervals, Seed seed) {
    model.validate();
    if (n_intervals == 0) throw ConfigError("n_intervals must be at least 1");
    return kernels::omp::generate(model, n_intervals, seed);
}

void write_run_csv(std::ostream& out, const Run& run) {
    out << kRunCsvHeader << '\n';
    for (std::size_t i = 0; i < run.size(); ++i) {
        const auto& obs = run[i];
        for (std::size_t s = 0; s < obs.counts.size(); ++s) {
            out << i << ',' << s << ',' << obs.counts[s] << ',' << obs.dummy_counts[s] << ','
                << (obs.is_anomaly ? 1 : 0) << ',';
            if (obs.anomaly_slot) out << *obs.anomaly_slot;
            out << ',' << to_string(obs.obf_action) << '\n';
        }
    }
}

namespace {

template <class T>
T parse_number(std::string_view field, std::size_t line) {
    T value{};
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        throw DataError("run csv line " + std::to_string(line) + ": bad number \"" + std::string(field) + "\"");
    return value;
}

}  // namespace

Run read_run_csv(std::istream& in) {
    Run run;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            if (line != kRunCsvHeader) throw DataError("run csv: unexpected header");
            header_seen = true;
            continue;
        }
        std::vector<std::string_view> f;
        std::string_view rest(line);
        for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos; rest.remove_prefix(pos + 1))
            f.push_back(rest.substr(0, pos));
        f.push_back(rest);
        if (f.size() != 7) throw DataError("run csv line " + std::to_string(line_no) + ": expected 7 fields");

        const auto interval = parse_number<std::size_t>(f[0], line_no);
        const auto slot = parse_number<std::size_t>(f[1], line_no);
        if (interval == run.size()) {
            run.emplace_back();
            run.back().is_anomaly = parse_number<int>(f[4], line_no) != 0;
            if (!f[5].empty()) run.back().anomaly_slot = parse_number<int>(f[5], line_no);
            run.back().obf_action = parse_obf_action(f[6]);
        } else if (interval + 1 != run.size()) {
            throw DataError("run csv line " + std::to_string(line_no) + ": intervals out of order");
        }
        auto& obs = run.back();
        if (slot != obs.counts.size()) throw DataError("run csv line " + std::to_string(line_no) + ": slots out of order");
        obs.counts.push_back(parse_number<Count>(f[2], line_no));
        obs.dummy_counts.push_back(parse_number<Count>(f[3], line_no));
    }
    for (const auto& obs : run) obs.validate(static_cast<int>(obs.counts.size()));
    return run;
}

}  // namespace leakage::traffic
