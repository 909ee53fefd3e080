#include "leakage/attacker.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>

#include "leakage/error.hpp"
#include "leakage/kernels.hpp"

namespace leakage::attacker {

DispersionStat dispersion(std::span<const Count> counts) {
    if (counts.size() < 2) throw ConfigError("dispersion needs at least two slots");
    DispersionStat st;
    const auto n = static_cast<double>(counts.size());
    double sum = 0.0;
    for (Count c : counts) sum += static_cast<double>(c);
    st.mean = sum / n;
    if (st.mean == 0.0) {
        st.degenerate = true;
        return st;
    }
    double ss = 0.0;
    for (Count c : counts) {
        const double d = static_cast<double>(c) - st.mean;
        ss += d * d;
    }
    st.variance = ss / (n - 1.0);
    st.dispersion = st.variance / st.mean;
    return st;
}

// ---------------------------------------------------------------------------

H1Distribution::H1Distribution(int slots, double lambda, double intensity, std::vector<Point> quantiles)
    : slots_(slots), lambda_(lambda), intensity_(intensity), quantiles_(std::move(quantiles)) {
    if (quantiles_.size() < 2) throw DataError("H1 table needs at least two quantiles");
    std::sort(quantiles_.begin(), quantiles_.end(), [](const Point& a, const Point& b) { return a.p < b.p; });
    for (std::size_t i = 1; i < quantiles_.size(); ++i) {
        if (quantiles_[i].value < quantiles_[i - 1].value) throw DataError("H1 quantile values must be non-decreasing");
    }
}

H1Distribution H1Distribution::simulate(int slots, double lambda, double intensity, std::size_t n, Seed seed) {
    traffic::IntervalModel model{slots, lambda, intensity, 1.0};
    model.validate();
    const auto run = kernels::omp::generate(model, n, seed);
    const auto stats = kernels::omp::dispersions(run);
    std::vector<double> values;
    values.reserve(stats.size());
    for (const auto& st : stats) values.push_back(st.dispersion);
    std::sort(values.begin(), values.end());

    // Order statistics at p = 0, 0.001, ..., 1 (linear interpolation between ranks).
    constexpr int kSteps = 1000;
    std::vector<Point> q;
    q.reserve(kSteps + 1);
    for (int i = 0; i <= kSteps; ++i) {
        const double p = static_cast<double>(i) / kSteps;
        const double pos = p * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, values.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        q.push_back({p, values[lo] + frac * (values[hi] - values[lo])});
    }
    return H1Distribution(slots, lambda, intensity, std::move(q));
}

double H1Distribution::quantile(double p) const {
    if (p <= quantiles_.front().p) return quantiles_.front().value;
    if (p >= quantiles_.back().p) return quantiles_.back().value;
    auto it = std::lower_bound(quantiles_.begin(), quantiles_.end(), p,
                               [](const Point& a, double x) { return a.p < x; });
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    return lo.value + (p - lo.p) / (hi.p - lo.p) * (hi.value - lo.value);
}

double H1Distribution::cdf(double d) const {
    if (d < quantiles_.front().value) return 0.0;
    if (d >= quantiles_.back().value) return 1.0;
    // Last point with value <= d; flat stretches resolve to their upper p.
    auto it = std::upper_bound(quantiles_.begin(), quantiles_.end(), d,
                               [](double x, const Point& a) { return x < a.value; });
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    if (hi.value == lo.value) return hi.p;
    return lo.p + (d - lo.value) / (hi.value - lo.value) * (hi.p - lo.p);
}

void write_h1_csv(std::ostream& out, std::span<const H1Distribution> tables) {
    out << kH1CsvHeader << '\n' << std::setprecision(17);
    for (const auto& t : tables) {
        for (const auto& q : t.quantiles()) {
            out << t.slots() << ',' << t.lambda() << ',' << t.intensity() << ',' << q.p << ',' << q.value << '\n';
        }
    }
}

std::vector<H1Distribution> read_h1_csv(std::istream& in) {
    std::map<std::tuple<int, double, double>, std::vector<H1Distribution::Point>> cells;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            if (line != kH1CsvHeader) throw DataError("H1 cache: unexpected header");
            header_seen = true;
            continue;
        }
        std::istringstream row(line);
        int s = 0;
        double lambda = 0, intensity = 0, p = 0, value = 0;
        char c1 = 0, c2 = 0, c3 = 0, c4 = 0;
        if (!(row >> s >> c1 >> lambda >> c2 >> intensity >> c3 >> p >> c4 >> value) || c1 != ',' || c2 != ',' ||
            c3 != ',' || c4 != ',')
            throw DataError("H1 cache line " + std::to_string(line_no) + ": malformed row");
        cells[{s, lambda, intensity}].push_back({p, value});
    }
    std::vector<H1Distribution> out;
    for (auto& [key, points] : cells) {
        out.emplace_back(std::get<0>(key), std::get<1>(key), std::get<2>(key), std::move(points));
    }
    return out;
}

std::shared_ptr<const H1Distribution> H1Cache::get(int slots, double lambda, double intensity) {
    const Key key{slots, lambda, intensity};
    {
        std::lock_guard lock(mutex_);
        if (auto it = tables_.find(key); it != tables_.end()) return it->second;
    }
    auto table = std::make_shared<const H1Distribution>(
        H1Distribution::simulate(slots, lambda, intensity, samples_, seed_));
    std::lock_guard lock(mutex_);
    return tables_.try_emplace(key, std::move(table)).first->second;
}

void H1Cache::insert(H1Distribution table) {
    Key key{table.slots(), table.lambda(), table.intensity()};
    std::lock_guard lock(mutex_);
    tables_.insert_or_assign(key, std::make_shared<const H1Distribution>(std::move(table)));
}

void H1Cache::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open H1 cache " + path);
    for (auto& t : read_h1_csv(in)) insert(std::move(t));
}

void H1Cache::save(const std::string& path) const {
    std::vector<H1Distribution> tables;
    {
        std::lock_guard lock(mutex_);
        for (const auto& [key, t] : tables_) tables.push_back(*t);
    }
    std::ofstream out(path);
    if (!out) throw DataError("cannot write H1 cache " + path);
    write_h1_csv(out, tables);
}

std::size_t H1Cache::size() const {
    std::lock_guard lock(mutex_);
    return tables_.size();
}

// ---------------------------------------------------------------------------

std::string_view to_string(DetectorMode mode) {
    return mode == DetectorMode::chi_square ? "chi-square" : "idealized";
}

DetectorMode parse_detector_mode(std::string_view text) {
    if (text == "chi-square") return DetectorMode::chi_square;
    if (text == "idealized") return DetectorMode::idealized;
    throw ConfigError("detector.mode must be chi-square or idealized, got \"" + std::string(text) + "\"");
}

std::string_view to_string(GuessRule rule) { return rule == GuessRule::map ? "map" : "posterior-matching"; }

GuessRule parse_guess_rule(std::string_view text) {
    if (text == "posterior-matching") return GuessRule::posterior_matching;
    if (text == "map") return GuessRule::map;
    throw ConfigError("detector.guess must be posterior-matching or map, got \"" + std::string(text) + "\"");
}

void DetectorConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("detector.alpha must lie in (0, 1)");
    if (!(anomaly_rate >= 0.0 && anomaly_rate <= 1.0)) throw ConfigError("detector anomaly rate must lie in [0, 1]");
}

double chi_square_threshold(int slots, double alpha) {
    if (slots < 2) throw ConfigError("chi-square threshold needs S >= 2");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    const boost::math::chi_squared_distribution<double> chi2(slots - 1);
    return boost::math::quantile(boost::math::complement(chi2, alpha));
}

Verdict test_counts(std::span<const Count> counts, const DetectorConfig& cfg) {
    const auto st = dispersion(counts);
    const int slots = static_cast<int>(counts.size());
    // The quantile is costly; runs reuse one (S, alpha) pair per thread.
    thread_local int cached_slots = 0;
    thread_local double cached_alpha = 0.0;
    thread_local double cached_threshold = 0.0;
    if (slots != cached_slots || cfg.alpha != cached_alpha) {
        cached_threshold = chi_square_threshold(slots, cfg.alpha);
        cached_slots = slots;
        cached_alpha = cfg.alpha;
    }
    Verdict v;
    v.threshold = cached_threshold;
    if (st.degenerate) return v;
    v.statistic = (slots - 1) * st.dispersion;
    v.flagged = v.statistic > v.threshold;
    return v;
}

bool looks_anomalous(const traffic::IntervalObservation& obs) {
    using traffic::ObfAction;
    return (obs.is_anomaly && obs.obf_action != ObfAction::waterfilled) || obs.obf_action == ObfAction::fake_anomaly;
}

Verdict test_interval(const traffic::IntervalObservation& obs, const DetectorConfig& cfg) {
    if (cfg.mode == DetectorMode::chi_square) return test_counts(obs.counts, cfg);
    Verdict v;
    v.flagged = looks_anomalous(obs);
    v.statistic = v.flagged ? 1.0 : 0.0;
    v.threshold = 0.5;
    return v;
}

ClassPosterior posterior_from_masses(const ClassMasses& m) {
    const double prior = m.anomaly_flagged + m.anomaly_clear;
    const double flagged = m.anomaly_flagged + m.baseline_flagged;
    const double clear = m.anomaly_clear + m.baseline_clear;
    ClassPosterior post;
    post.given_flagged = flagged > 0.0 ? m.anomaly_flagged / flagged : prior;
    post.given_clear = clear > 0.0 ? m.anomaly_clear / clear : prior;
    return post;
}

ClassMasses empirical_masses(std::span<const Verdict> verdicts, const std::vector<bool>& truths) {
    if (verdicts.size() != truths.size()) throw ConfigError("verdicts and truths differ in length");
    std::size_t af = 0, ac = 0, bf = 0, bc = 0;
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        if (truths[i]) (verdicts[i].flagged ? af : ac)++;
        else (verdicts[i].flagged ? bf : bc)++;
    }
    const auto n = static_cast<double>(std::max<std::size_t>(verdicts.size(), 1));
    return {af / n, ac / n, bf / n, bc / n};
}

ClassPosterior chi_square_posterior(const DetectorConfig& cfg, int slots) {
    if (!cfg.h1) throw ConfigError("chi-square posterior needs an H1 distribution");
    const double threshold = chi_square_threshold(slots, cfg.alpha);
    const double power = 1.0 - cfg.h1->cdf(threshold / (slots - 1));
    const double rp = cfg.anomaly_rate;
    const double rn = 1.0 - rp;
    return posterior_from_masses({rp * power, rp * (1.0 - power), rn * cfg.alpha, rn * (1.0 - cfg.alpha)});
}

void assign_posteriors(std::span<Verdict> verdicts, const ClassPosterior& posterior) {
    for (auto& v : verdicts) v.posterior_anomaly = posterior(v.flagged);
}

std::vector<Verdict> test_run(const traffic::Run& run, const DetectorConfig& cfg) {
    cfg.validate();
    return kernels::omp::verdicts(run, cfg);
}

std::vector<bool> guess_run(std::span<const Verdict> verdicts, const DetectorConfig& cfg, Seed seed) {
    for (const auto& v : verdicts) {
        if (!(v.posterior_anomaly >= 0.0 && v.posterior_anomaly <= 1.0))
            throw ConfigError("verdict posterior_anomaly must lie in [0, 1]");
    }
    return kernels::omp::guesses(verdicts, cfg, seed);
}

double guessing_error(const std::vector<bool>& guesses, const std::vector<bool>& truths) {
    if (guesses.size() != truths.size()) throw ConfigError("guesses and truths differ in length");
    std::size_t anomalies = 0;
    std::size_t missed = 0;
    for (std::size_t i = 0; i < truths.size(); ++i) {
        if (!truths[i]) continue;
        ++anomalies;
        if (!guesses[i]) ++missed;
    }
    if (anomalies == 0) throw UndefinedMetric("guessing error is undefined without true anomalies");
    return static_cast<double>(missed) / static_cast<double>(anomalies);
}

std::vector<bool> truths(const traffic::Run& run) {
    std::vector<bool> out(run.size());
    for (std::size_t i = 0; i < run.size(); ++i) out[i] = run[i].is_anomaly;
    return out;
}

}  // namespace leakage::attacker
