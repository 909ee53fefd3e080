#include "leakage/experiment.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "leakage/error.hpp"

namespace leakage::experiment {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kJackknifeGroups = 20;

// Sub-streams of a cell seed.
enum Stream : std::uint64_t { kGenerate = 1, kObfuscate = 2, kGuess = 3, kCalibGenerate = 4, kCalibObfuscate = 5 };

// counts[truth][flagged]
using Table2 = std::array<std::array<double, 2>, 2>;

double conditional_entropy_bits(const Table2& n) {
    const double total = n[0][0] + n[0][1] + n[1][0] + n[1][1];
    if (total <= 0.0) return 0.0;
    double h = 0.0;
    for (int c = 0; c < 2; ++c) {
        const double in_class = n[0][c] + n[1][c];
        if (in_class > 0.0) h += in_class / total * binary_entropy(n[1][c] / in_class);
    }
    return h;
}

struct EntropyEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

// Plug-in H(truth | class) with a grouped-jackknife standard error.
EntropyEstimate entropy_with_jackknife(const std::vector<attacker::Verdict>& verdicts, const std::vector<bool>& truth) {
    const std::size_t n = verdicts.size();
    std::vector<Table2> groups(kJackknifeGroups, Table2{});
    Table2 all{};
    for (std::size_t i = 0; i < n; ++i) {
        const auto g = i * kJackknifeGroups / n;
        groups[g][truth[i]][verdicts[i].flagged] += 1.0;
        all[truth[i]][verdicts[i].flagged] += 1.0;
    }
    EntropyEstimate est;
    est.value = conditional_entropy_bits(all);

    std::array<double, kJackknifeGroups> leave_out{};
    double mean = 0.0;
    for (int g = 0; g < kJackknifeGroups; ++g) {
        Table2 rest = all;
        for (int t = 0; t < 2; ++t)
            for (int c = 0; c < 2; ++c) rest[t][c] -= groups[g][t][c];
        leave_out[g] = conditional_entropy_bits(rest);
        mean += leave_out[g] / kJackknifeGroups;
    }
    double ss = 0.0;
    for (double v : leave_out) ss += (v - mean) * (v - mean);
    est.std_error = std::sqrt((kJackknifeGroups - 1.0) / kJackknifeGroups * ss);
    return est;
}

bool is_noop(const obfuscator::Strategy& s) { return s.waterfill_prob == 0.0 && s.fake_prob == 0.0; }

}  // namespace

double binary_entropy(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

void CellSpec::validate() const {
    model.validate();
    knowledge.validate();
    if (!(budget >= 0.0) || !std::isfinite(budget)) throw ConfigError("obfuscator.budget must be non-negative");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("detector.alpha must lie in (0, 1)");
    if (n_intervals < static_cast<std::size_t>(kJackknifeGroups))
        throw ConfigError("n_intervals must be at least " + std::to_string(kJackknifeGroups));
}

MetricsReport run_cell(const CellSpec& spec, attacker::H1Cache* h1_cache) {
    spec.validate();
    const auto& model = spec.model;
    const double rp = model.anomaly_rate;

    MetricsReport r;
    r.anomaly_rate = rp;
    r.intensity = model.intensity;
    r.slots = model.slots;
    r.lambda = model.lambda;
    r.true_positive = spec.knowledge.true_positive;
    r.true_negative = spec.knowledge.true_negative;
    r.budget = spec.budget;
    r.ideal_guess_err = 1.0 - rp;
    r.ideal_ce_bits = binary_entropy(rp);

    const auto cost = obfuscator::costs(model, spec.normalizer);
    r.strategy = obfuscator::solve_strategy(cost, spec.knowledge, spec.budget);

    const auto clean = traffic::gen_run(model, spec.n_intervals, derive_seed(spec.seed, kGenerate));
    const auto run = obfuscator::apply_strategy(clean, r.strategy, spec.knowledge, cost, derive_seed(spec.seed, kObfuscate));
    r.realized_cost = obfuscator::realized_relative_cost(run, cost);

    attacker::DetectorConfig cfg;
    cfg.mode = spec.detector;
    cfg.alpha = spec.alpha;
    cfg.anomaly_rate = rp;
    cfg.guess = spec.guess;

    auto verdicts = attacker::test_run(run, cfg);
    const auto truth = attacker::truths(run);

    if (spec.detector == attacker::DetectorMode::idealized) {
        r.attacker_posterior = attacker::posterior_from_masses(obfuscator::class_masses(
            rp, spec.knowledge, r.strategy.waterfill_prob, r.strategy.fake_prob));
    } else if (is_noop(r.strategy)) {
        attacker::H1Cache local;
        auto& cache = h1_cache != nullptr ? *h1_cache : local;
        cfg.h1 = cache.get(model.slots, model.lambda, model.intensity);
        r.attacker_posterior = attacker::chi_square_posterior(cfg, model.slots);
    } else {
        // The attacker knows the statistic's distribution under each class;
        // an independent calibration run stands in for that knowledge.
        const auto calib_clean = traffic::gen_run(model, spec.n_intervals, derive_seed(spec.seed, kCalibGenerate));
        const auto calib = obfuscator::apply_strategy(calib_clean, r.strategy, spec.knowledge, cost,
                                                      derive_seed(spec.seed, kCalibObfuscate));
        const auto calib_verdicts = attacker::test_run(calib, cfg);
        r.attacker_posterior =
            attacker::posterior_from_masses(attacker::empirical_masses(calib_verdicts, attacker::truths(calib)));
    }
    r.empirical_posterior = attacker::posterior_from_masses(attacker::empirical_masses(verdicts, truth));

    attacker::assign_posteriors(verdicts, r.attacker_posterior);
    const auto guesses = attacker::guess_run(verdicts, cfg, derive_seed(spec.seed, kGuess));

    std::size_t anomalies = 0;
    for (bool t : truth) anomalies += t;
    if (anomalies > 0) {
        r.guess_err = attacker::guessing_error(guesses, truth);
        r.guess_err_se = std::sqrt(r.guess_err * (1.0 - r.guess_err) / static_cast<double>(anomalies));
    } else {
        r.guess_err = kNaN;
        r.guess_err_se = kNaN;
    }

    const auto ce = entropy_with_jackknife(verdicts, truth);
    r.ce_bits = ce.value;
    r.ce_bits_se = ce.std_error;
    return r;
}

void SweepSpec::validate() const {
    if (anomaly_rates.empty() || intensities.empty()) throw ConfigError("sweep grids must be non-empty");
    if (base.n_intervals < 1000) throw ConfigError("sweep.n_intervals must be at least 1000");
}

Seed cell_seed(Seed base, double anomaly_rate, double intensity) {
    return derive_seed(derive_seed(base, std::bit_cast<std::uint64_t>(anomaly_rate)),
                       std::bit_cast<std::uint64_t>(intensity));
}

std::vector<MetricsReport> run_sweep(const SweepSpec& spec, attacker::H1Cache* h1_cache) {
    spec.validate();
    std::vector<MetricsReport> out;
    out.reserve(spec.anomaly_rates.size() * spec.intensities.size());
    for (double intensity : spec.intensities) {
        for (double rp : spec.anomaly_rates) {
            CellSpec cell = spec.base;
            cell.model.anomaly_rate = rp;
            cell.model.intensity = intensity;
            cell.seed = cell_seed(spec.base.seed, rp, intensity);
            try {
                out.push_back(run_cell(cell, h1_cache));
            } catch (const std::exception& e) {
                MetricsReport failed;
                failed.anomaly_rate = rp;
                failed.intensity = intensity;
                failed.slots = cell.model.slots;
                failed.lambda = cell.model.lambda;
                failed.true_positive = cell.knowledge.true_positive;
                failed.true_negative = cell.knowledge.true_negative;
                failed.budget = cell.budget;
                failed.strategy.waterfill_prob = failed.strategy.fake_prob = kNaN;
                failed.strategy.epsilon = failed.strategy.cost = kNaN;
                failed.guess_err = failed.guess_err_se = failed.ce_bits = failed.ce_bits_se = kNaN;
                const bool prior_ok = rp >= 0.0 && rp <= 1.0;
                failed.ideal_guess_err = prior_ok ? 1.0 - rp : kNaN;
                failed.ideal_ce_bits = prior_ok ? binary_entropy(rp) : kNaN;
                failed.error = e.what();
                out.push_back(std::move(failed));
            }
        }
    }
    return out;
}

void write_sweep_csv(std::ostream& out, std::span<const MetricsReport> reports) {
    out << kSweepCsvHeader << '\n';
    const auto old_precision = out.precision(12);
    for (const auto& r : reports) {
        out << r.anomaly_rate << ',' << r.intensity << ',' << r.slots << ',' << r.lambda << ',' << r.true_positive
            << ',' << r.true_negative << ',' << r.budget << ',' << r.strategy.waterfill_prob << ','
            << r.strategy.fake_prob << ',' << r.strategy.epsilon << ',' << r.strategy.cost << ',';
        if (!r.error.empty()) out << "error";
        else out << (r.strategy.feasible_optimal ? 1 : 0);
        out << ',' << r.guess_err << ',' << r.guess_err_se << ',' << r.ce_bits << ',' << r.ce_bits_se << ','
            << r.ideal_guess_err << ',' << r.ideal_ce_bits << '\n';
    }
    out.precision(old_precision);
}

std::string reports_json(std::span<const MetricsReport> reports) {
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : reports) {
        nlohmann::ordered_json j;
        j["R_p"] = r.anomaly_rate;
        j["I"] = r.intensity;
        j["S"] = r.slots;
        j["lambda"] = r.lambda;
        j["P_tp"] = r.true_positive;
        j["P_tn"] = r.true_negative;
        j["budget"] = r.budget;
        j["P_wf"] = num(r.strategy.waterfill_prob);
        j["P_f"] = num(r.strategy.fake_prob);
        j["epsilon"] = num(r.strategy.epsilon);
        j["cost"] = num(r.strategy.cost);
        j["feasible_optimal"] = r.strategy.feasible_optimal;
        j["degenerate"] = r.strategy.degenerate;
        j["guess_err"] = num(r.guess_err);
        j["guess_err_se"] = num(r.guess_err_se);
        j["ce_bits"] = num(r.ce_bits);
        j["ce_bits_se"] = num(r.ce_bits_se);
        j["ideal_guess_err"] = r.ideal_guess_err;
        j["ideal_ce_bits"] = r.ideal_ce_bits;
        j["attacker_posterior"] = {{"given_flagged", r.attacker_posterior.given_flagged},
                                   {"given_clear", r.attacker_posterior.given_clear}};
        j["empirical_posterior"] = {{"given_flagged", r.empirical_posterior.given_flagged},
                                    {"given_clear", r.empirical_posterior.given_clear}};
        j["realized_cost"] = num(r.realized_cost);
        if (!r.error.empty()) j["error"] = r.error;
        arr.push_back(std::move(j));
    }
    return arr.dump(2);
}

std::vector<CostCurveRow> cost_curves(int slots, std::span<const double> lambdas, std::span<const double> intensities,
                                      std::span<const double> ks, obfuscator::WaterfillNormalizer normalizer) {
    if (lambdas.empty() || intensities.empty() || ks.empty()) throw ConfigError("cost curve grids must be non-empty");
    std::vector<CostCurveRow> rows;
    for (double lambda : lambdas) {
        for (double intensity : intensities) {
            const traffic::IntervalModel model{slots, lambda, intensity, 0.0};
            model.validate();
            for (double k : ks) {
                if (!(k >= 1.0)) throw ConfigError("cost curve k must be at least 1");
                CostCurveRow row{k, slots, lambda, intensity};
                row.fake_cost = obfuscator::fake_relative_cost(model, obfuscator::solve_fake_rate(model, k));
                try {
                    row.waterfill_cost = obfuscator::waterfill_relative_cost(
                        model, obfuscator::solve_waterfill_rate(model, k), normalizer);
                } catch (const InfeasibleTarget&) {
                    row.waterfill_cost = kNaN;
                    row.waterfill_feasible = false;
                }
                rows.push_back(row);
            }
        }
    }
    return rows;
}

void write_cost_csv(std::ostream& out, std::span<const CostCurveRow> rows) {
    out << kCostCsvHeader << '\n';
    const auto old_precision = out.precision(12);
    for (const auto& r : rows) {
        out << r.k << ',' << r.slots << ',' << r.lambda << ',' << r.intensity << ',' << r.fake_cost << ','
            << r.waterfill_cost << ',' << (r.waterfill_feasible ? 1 : 0) << '\n';
    }
    out.precision(old_precision);
}

}  // namespace leakage::experiment
