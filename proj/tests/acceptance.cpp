// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit when any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "leakage/attacker.hpp"
#include "leakage/cli.hpp"
#include "leakage/config.hpp"
#include "leakage/experiment.hpp"
#include "leakage/fixture.hpp"
#include "leakage/obfuscator.hpp"
#include "leakage/traffic.hpp"
#include "oracles.hpp"

using namespace leakage;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void check(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [fail: " << what << "]";
        }
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

double pooled_dispersion(const traffic::Run& run) {
    double sum_var = 0.0, sum_mean = 0.0;
    for (const auto& obs : run) {
        auto st = attacker::dispersion(obs.counts);
        sum_var += st.variance;
        sum_mean += st.mean;
    }
    return sum_var / sum_mean;
}

obfuscator::Strategy manual(double wf, double f) {
    obfuscator::Strategy s;
    s.waterfill_prob = wf;
    s.fake_prob = f;
    return s;
}

constexpr std::size_t kIntervals = 100000;

void baseline_dispersion(Outcome& o) {
    const auto start = Clock::now();
    const double alpha = 0.05;
    for (int s : {10, 20}) {
        for (double lambda : {1.0, 5.0}) {
            traffic::IntervalModel m{s, lambda, 1.0, 0.0};
            auto run = traffic::gen_run(m, kIntervals, derive_seed(1001, s * 100 + static_cast<int>(lambda)));
            double sum_d = 0.0, used = 0.0, flagged = 0.0;
            attacker::DetectorConfig cfg{attacker::DetectorMode::chi_square, alpha};
            for (const auto& obs : run) {
                auto st = attacker::dispersion(obs.counts);
                if (!st.degenerate) {
                    sum_d += st.dispersion;
                    used += 1;
                }
                flagged += attacker::test_counts(obs.counts, cfg).flagged;
            }
            const double mean_d = sum_d / used;
            const double fpr = flagged / static_cast<double>(run.size());
            const double band = oracle::three_sigma_binomial(alpha, static_cast<double>(run.size()));
            o.detail << " S=" << s << ",lambda=" << lambda << ":D=" << mean_d << ",FPR=" << fpr << "(alpha+-" << band
                     << ")";
            o.check(std::abs(mean_d - 1.0) <= 0.01, "mean D");
            o.check(std::abs(fpr - alpha) <= band, "false-positive rate");
        }
    }
    const double t = seconds_since(start);
    o.detail << " runtime=" << t << "s";
    o.check(t < 60.0, "runtime");
}

void cost_fidelity(Outcome& o) {
    for (double intensity : {10.0, 40.0}) {
        traffic::IntervalModel m{10, 1.0, intensity, 0.0};
        auto c = obfuscator::costs(m);
        // Expected dispersion of the two injected shapes, evaluated independently.
        const double fake_d = oracle::mixed_dispersion(10, m.lambda, m.lambda + c.lambda_fa);
        const double wf_d = oracle::mixed_dispersion(10, m.lambda + c.lambda_wf, m.anomaly_lambda());
        o.check(std::abs(fake_d - c.target_dispersion) <= 1e-12 * c.target_dispersion, "fake back-substitution");
        o.check(std::abs(wf_d - 1.0) <= 1e-12, "waterfill back-substitution");

        auto base = traffic::gen_run(m, kIntervals, derive_seed(2001, static_cast<int>(intensity)));
        auto faked = obfuscator::apply_strategy(base, manual(0, 1), {}, c, 2002);
        traffic::IntervalModel ma = m;
        ma.anomaly_rate = 1.0;
        auto anom = traffic::gen_run(ma, kIntervals, derive_seed(2003, static_cast<int>(intensity)));
        auto filled = obfuscator::apply_strategy(anom, manual(1, 0), {}, c, 2004);
        const double fake_mc = pooled_dispersion(faked);
        const double wf_mc = pooled_dispersion(filled);
        o.check(std::abs(fake_mc - c.target_dispersion) <= 0.05, "fake MC dispersion");
        o.check(std::abs(wf_mc - 1.0) <= 0.05, "waterfill MC dispersion");
        o.detail << " I=" << intensity << ":C_f=" << c.fake_cost << ",C_wf=" << c.waterfill_cost
                 << ",fakeD=" << fake_mc << "/" << c.target_dispersion << ",wfD=" << wf_mc;
    }
    const std::vector<double> lambdas{1.0}, intensities{10.0, 40.0};
    const std::vector<double> ks{1.5, 2, 3, 4, 6, 8};
    std::size_t compared = 0;
    for (const auto& row : experiment::cost_curves(10, lambdas, intensities, ks)) {
        if (!row.waterfill_feasible) continue;
        ++compared;
        o.check(row.fake_cost < row.waterfill_cost, "C_f < C_wf at I=" + std::to_string(row.intensity) +
                                                        " k=" + std::to_string(row.k));
    }
    o.check(compared > 0, "no comparable k");
    o.detail << " equal-shift comparisons=" << compared;
}

void optimality_identities(Outcome& o) {
    Rng rng(3001);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double rp = 1e-3 + (1.0 - 2e-3) * rng.uniform();
        const double pf = rng.uniform();
        const auto sides = oracle::balance(rp, 1.0 - pf, pf);
        worst = std::max(worst, std::abs(sides.lhs - sides.rhs));
    }
    o.check(worst <= 1e-12, "complete-knowledge balance");
    o.detail << " complete max|lhs-rhs|=" << worst;

    worst = 0.0;
    for (int i = 0; i < 100;) {
        const double rp = 1e-3 + (1.0 - 2e-3) * rng.uniform();
        const double ptp = 1.0 - rng.uniform();
        const double ptn = 1.0 - rng.uniform();
        // Both closed forms describe the same line; sample P_f inside the square.
        const double lo = std::max(0.0, (1.0 - ptp) / ptn);
        const double hi = std::min(1.0, 1.0 / ptn);
        if (lo > hi) continue;
        const double pf = lo + (hi - lo) * rng.uniform();
        const double pwf = (1.0 - ptn * pf) / ptp;
        const auto sides = oracle::balance(rp, pwf, pf, ptp, ptn);
        worst = std::max(worst, std::abs(sides.lhs - sides.rhs));
        worst = std::max(worst, std::abs(pf - (1.0 - ptp * pwf) / ptn));
        ++i;
    }
    o.check(worst <= 1e-12, "incomplete-knowledge balance");
    o.detail << " incomplete max|lhs-rhs|=" << worst;
}

struct Sweeps {
    std::vector<experiment::MetricsReport> complete;
    std::vector<experiment::MetricsReport> incomplete;
    double complete_seconds = 0.0;
    double incomplete_seconds = 0.0;
};

std::string config_path(const char* name) { return std::string(LEAKAGE_CONFIG_DIR) + "/" + name; }

std::vector<experiment::MetricsReport> sweep_config(const char* name, double& seconds) {
    const auto cfg = Config::load(config_path(name));
    auto rc = cli::RunConfig::from(cfg, cfg.get_u64("seed", 1));
    const auto start = Clock::now();
    auto reports = experiment::run_sweep(rc.sweep());
    seconds = seconds_since(start);
    return reports;
}

void feasibility_regions(const Sweeps& s, Outcome& o) {
    std::map<double, int> width;
    for (const auto& r : s.complete) {
        o.check(r.error.empty(), "cell error: " + r.error);
        width[r.intensity] += r.strategy.feasible_optimal && !r.strategy.degenerate;
    }
    int previous = 1 << 30;
    o.detail << " complete feasible cells per I:";
    for (const auto& [intensity, count] : width) {
        o.detail << " " << intensity << "->" << count;
        o.check(count <= previous, "width grows at I=" + std::to_string(intensity));
        previous = count;
    }
    int low_feasible = 0;
    for (const auto& r : s.incomplete) {
        o.check(r.error.empty(), "cell error: " + r.error);
        if (r.intensity >= 30 && r.anomaly_rate < 0.5 && r.strategy.feasible_optimal) ++low_feasible;
    }
    o.detail << "; incomplete feasible cells with R_p<0.5, I>=30: " << low_feasible;
    o.check(low_feasible == 0, "incomplete low-rate cell feasible");
    o.detail << "; runtime " << s.complete_seconds << "s + " << s.incomplete_seconds << "s";
    o.check(s.complete_seconds < 300.0 && s.incomplete_seconds < 300.0, "runtime");
}

void quoted_point(const Sweeps& s, Outcome& o) {
    const experiment::MetricsReport* cell = nullptr;
    for (const auto& r : s.complete)
        if (r.anomaly_rate == 0.2 && r.intensity == 40.0) cell = &r;
    if (!cell) {
        o.check(false, "cell R_p=0.2, I=40 missing from the sweep");
        return;
    }
    o.detail << " guess_err=" << cell->guess_err << "+-" << cell->guess_err_se << " ideal=" << cell->ideal_guess_err
             << " P_wf=" << cell->strategy.waterfill_prob << " P_f=" << cell->strategy.fake_prob
             << " cost=" << cell->strategy.cost;
    o.check(cell->guess_err >= 0.55 && cell->guess_err <= 0.70, "guessing error outside [0.55, 0.70]");
}

void ideality(const Sweeps& s, Outcome& o) {
    int cells = 0;
    double worst = 0.0;
    for (const auto* reports : {&s.complete, &s.incomplete}) {
        for (const auto& r : *reports) {
            if (!r.strategy.feasible_optimal) continue;
            ++cells;
            const double rp = r.anomaly_rate;
            const double ge_z = std::abs(r.guess_err - (1.0 - rp)) / r.guess_err_se;
            const double ce_z = std::abs(r.ce_bits - oracle::binary_entropy(rp)) / r.ce_bits_se;
            worst = std::max({worst, ge_z, ce_z});
            std::ostringstream where;
            where << "R_p=" << rp << " I=" << r.intensity << " P_tp=" << r.true_positive;
            o.check(ge_z <= 3.0, "guess_err " + where.str());
            o.check(ce_z <= 3.0, "ce_bits " + where.str());
        }
    }
    o.detail << " feasible cells=" << cells << " worst z=" << worst;
    o.check(cells > 0, "no feasible cell");
}

void trace_oracles(Outcome& o) {
    int fixtures = 0;
    for (const auto& e : fs::directory_iterator(LEAKAGE_FIXTURE_DIR)) {
        if (e.path().extension() != ".json") continue;
        auto f = trace::load_fixture(e.path().string());
        const auto name = e.path().filename().string();
        double total = 0.0;
        if (f.observed) {
            for (const auto& row : trace::posterior_table(f.prior, f.mechanism, *f.observed)) total += row.p;
            o.check(std::abs(total - 1.0) <= 1e-9, "normalization " + name);
        } else {
            o.check(false, "no observed trace in " + name);
        }
        std::size_t largest = 0;
        for (const auto& entry : f.prior.support()) {
            for (const auto& [obs, q] : f.mechanism.outcomes(entry.trace.ticks())) largest = std::max(largest, obs.size());
        }
        if (largest > 8) continue;
        ++fixtures;
        const std::uint64_t salt = std::hash<std::string>{}(name) & 0xffff;
        auto ae = trace::average_error_exact(f.prior, f.mechanism, f.distance);
        auto ce = trace::conditional_entropy_exact(f.prior, f.mechanism);
        auto ae_mc = trace::average_error_mc(f.prior, f.mechanism, f.distance, kIntervals, derive_seed(7001, salt));
        auto ce_mc = trace::conditional_entropy_mc(f.prior, f.mechanism, kIntervals, derive_seed(7002, salt));
        o.check(std::abs(ae_mc.value - ae.value) <= 3.0 * ae_mc.std_error + 1e-9, "AE " + name);
        o.check(std::abs(ce_mc.value - ce.value) <= 3.0 * ce_mc.std_error + 1e-9, "CE " + name);
        o.detail << " " << name << ":AE " << ae.value << "/" << ae_mc.value << ",CE " << ce.value << "/"
                 << ce_mc.value;
    }
    o.check(fixtures > 0, "no fixtures");
}

void determinism(Outcome& o) {
    const auto dir = fs::temp_directory_path() / "leakage_acceptance";
    fs::create_directories(dir);
    std::string bytes[2];
    for (int i = 0; i < 2; ++i) {
        const auto out = (dir / ("figure_repro_" + std::to_string(i) + ".csv")).string();
        std::vector<std::string> args{"leakctl", "sweep", "--config", config_path("figure_repro.toml"), "--out", out};
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        std::ostringstream sink, err;
        const int code = cli::run(static_cast<int>(argv.size()), argv.data(), sink, err);
        o.check(code == 0, "leakctl exit " + std::to_string(code) + ": " + err.str());
        std::ifstream in(out, std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        bytes[i] = s.str();
    }
    o.detail << " csv bytes=" << bytes[0].size();
    o.check(!bytes[0].empty() && bytes[0] == bytes[1], "CSV bytes differ");
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> early{
        {"baseline dispersion", baseline_dispersion},
        {"cost-formula fidelity", cost_fidelity},
        {"optimality identities", optimality_identities},
    };
    bool all = true;
    int number = 0;
    auto report = [&](const std::string& name, const std::function<void(Outcome&)>& body) {
        Outcome o;
        ++number;
        try {
            body(o);
        } catch (const std::exception& e) {
            o.check(false, std::string("exception: ") + e.what());
        }
        all = all && o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << number << " (" << name << "):" << o.detail.str()
                  << std::endl;
    };
    for (const auto& [name, body] : early) report(name, body);

    Sweeps sweeps;
    std::string sweep_error;
    try {
        sweeps.complete = sweep_config("figure_repro.toml", sweeps.complete_seconds);
        sweeps.incomplete = sweep_config("figure_repro_incomplete.toml", sweeps.incomplete_seconds);
    } catch (const std::exception& e) {
        sweep_error = e.what();
    }
    auto with_sweeps = [&](void (*body)(const Sweeps&, Outcome&)) {
        return [&, body](Outcome& o) {
            if (!sweep_error.empty()) {
                o.check(false, "sweep failed: " + sweep_error);
                return;
            }
            body(sweeps, o);
        };
    };
    report("feasibility regions", with_sweeps(feasibility_regions));
    report("quoted quantitative point", with_sweeps(quoted_point));
    report("optimal-cell ideality", with_sweeps(ideality));
    report("trace-core oracle equivalence", trace_oracles);
    report("determinism", determinism);
    return all ? 0 : 1;
}
