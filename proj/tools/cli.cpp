#include "leakage/cli.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "leakage/error.hpp"
#include "leakage/fixture.hpp"
#include "leakage/trace.hpp"

namespace leakage::cli {

namespace {

using nlohmann::ordered_json;

const std::set<std::string> kKnownKeys{
    "seed",
    "traffic.S",
    "traffic.lambda",
    "traffic.intensity",
    "traffic.anomaly_rate",
    "obfuscator.P_tp",
    "obfuscator.P_tn",
    "obfuscator.budget",
    "obfuscator.wf_normalizer",
    "attacker.mode",
    "attacker.alpha",
    "attacker.guess",
    "attacker.h1_samples",
    "attacker.h1_cache",
    "experiment.n_intervals",
    "experiment.anomaly_rates",
    "experiment.intensities",
    "costs.lambdas",
    "costs.intensities",
    "costs.k",
    "analyze.slot_seconds",
    "analyze.device",
};

const std::vector<double> kDefaultKs{1, 1.5, 2, 3, 4, 6, 8, 12, 16, 24, 32};

// Shortest text that reads back to the same double.
std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

ordered_json jnum(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json meta(const RunConfig& rc) {
    std::ostringstream hash;
    hash << std::hex << rc.source.hash();
    return {{"tool", "leakage"}, {"version", std::string(kVersion)}, {"config", hash.str()}, {"seed", rc.seed}};
}

std::size_t positive_size(const Config& cfg, const std::string& key, std::int64_t fallback) {
    const auto v = cfg.get_int(key, fallback);
    if (v < 1) throw ConfigError(key + " must be at least 1");
    return static_cast<std::size_t>(v);
}

void ensure_grid(const std::vector<double>& grid, const std::string& key) {
    if (grid.empty()) throw ConfigError(key + " must be non-empty");
    for (double v : grid)
        if (!std::isfinite(v)) throw ConfigError(key + " holds a non-finite value");
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

std::string describe_seconds(const trace::TimeGrid& grid, const trace::Ticks& ticks) {
    std::string out;
    for (std::size_t i = 0; i < ticks.size(); ++i) {
        if (i > 0) out += ';';
        out += num(grid.to_seconds(ticks[i]));
    }
    return out;
}

}  // namespace

Format parse_format(std::string_view text) {
    if (text == "csv") return Format::csv;
    if (text == "json") return Format::json;
    throw ConfigError("--format must be csv or json");
}

RunConfig RunConfig::from(const Config& cfg, Seed seed) {
    for (const auto& [key, value] : cfg.values()) {
        if (!kKnownKeys.contains(key)) throw ConfigError("unknown config key \"" + key + "\"");
    }
    RunConfig rc;
    rc.source = cfg;
    rc.seed = seed;

    const auto slots = cfg.get_int("traffic.S", 10);
    if (slots < 2 || slots > 100000) throw ConfigError("traffic.S must lie in [2, 100000]");
    rc.model.slots = static_cast<int>(slots);
    rc.model.lambda = cfg.get_double("traffic.lambda", 1.0);
    rc.model.intensity = cfg.get_double("traffic.intensity", 1.0);
    rc.model.anomaly_rate = cfg.get_double("traffic.anomaly_rate", 0.0);
    rc.model.validate();

    rc.knowledge.true_positive = cfg.get_double("obfuscator.P_tp", 1.0);
    rc.knowledge.true_negative = cfg.get_double("obfuscator.P_tn", 1.0);
    rc.knowledge.validate();
    rc.budget = cfg.get_double("obfuscator.budget", 1.0);
    if (!(rc.budget >= 0.0) || !std::isfinite(rc.budget)) throw ConfigError("obfuscator.budget must be non-negative");
    rc.normalizer = obfuscator::parse_normalizer(cfg.get_string("obfuscator.wf_normalizer", "summed"));

    rc.detector = attacker::parse_detector_mode(cfg.get_string("attacker.mode", "idealized"));
    rc.alpha = cfg.get_double("attacker.alpha", 0.05);
    if (!(rc.alpha > 0.0 && rc.alpha < 1.0)) throw ConfigError("attacker.alpha must lie in (0, 1)");
    rc.guess = attacker::parse_guess_rule(cfg.get_string("attacker.guess", "posterior-matching"));
    rc.h1_samples = positive_size(cfg, "attacker.h1_samples", 100000);
    rc.h1_cache = cfg.get_string("attacker.h1_cache", "");

    rc.n_intervals = positive_size(cfg, "experiment.n_intervals", 100000);
    rc.anomaly_rates = cfg.get_doubles("experiment.anomaly_rates", {rc.model.anomaly_rate});
    rc.intensities = cfg.get_doubles("experiment.intensities", {rc.model.intensity});
    ensure_grid(rc.anomaly_rates, "experiment.anomaly_rates");
    ensure_grid(rc.intensities, "experiment.intensities");

    rc.cost_lambdas = cfg.get_doubles("costs.lambdas", {rc.model.lambda});
    rc.cost_intensities = cfg.get_doubles("costs.intensities", {rc.model.intensity});
    rc.cost_ks = cfg.get_doubles("costs.k", kDefaultKs);
    ensure_grid(rc.cost_lambdas, "costs.lambdas");
    ensure_grid(rc.cost_intensities, "costs.intensities");
    ensure_grid(rc.cost_ks, "costs.k");

    rc.slot_seconds = cfg.get_double("analyze.slot_seconds", 1.0);
    if (!(rc.slot_seconds > 0.0) || !std::isfinite(rc.slot_seconds))
        throw ConfigError("analyze.slot_seconds must be positive");
    rc.device = cfg.get_string("analyze.device", "");
    return rc;
}

experiment::CellSpec RunConfig::cell() const {
    experiment::CellSpec c;
    c.model = model;
    c.knowledge = knowledge;
    c.normalizer = normalizer;
    c.budget = budget;
    c.detector = detector;
    c.alpha = alpha;
    c.guess = guess;
    c.n_intervals = n_intervals;
    c.seed = seed;
    return c;
}

experiment::SweepSpec RunConfig::sweep() const {
    experiment::SweepSpec s;
    s.anomaly_rates = anomaly_rates;
    s.intensities = intensities;
    s.base = cell();
    return s;
}

attacker::DetectorConfig RunConfig::detector_config() const {
    attacker::DetectorConfig d;
    d.mode = detector;
    d.alpha = alpha;
    d.anomaly_rate = model.anomaly_rate;
    d.guess = guess;
    return d;
}

std::string header_line(const RunConfig& rc) {
    std::ostringstream os;
    os << "# leakage " << kVersion << " config=" << std::hex << rc.source.hash() << std::dec << " seed=" << rc.seed;
    return os.str();
}

// ---------------------------------------------------------------------------

ExternalTrace read_trace_csv(std::istream& in, const std::string& device, const std::string& origin) {
    ExternalTrace trace;
    trace.device = device;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::size_t last_line = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto where = origin + ":" + std::to_string(line_no);
        if (!header_seen) {
            if (line != "timestamp_s,device_id") throw DataError(where + ": expected header timestamp_s,device_id");
            header_seen = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
            throw DataError(where + ": expected two fields");
        const std::string ts = line.substr(0, comma);
        const std::string dev = line.substr(comma + 1);
        double t = 0.0;
        auto [ptr, ec] = std::from_chars(ts.data(), ts.data() + ts.size(), t);
        if (ec != std::errc{} || ptr != ts.data() + ts.size() || !std::isfinite(t))
            throw DataError(where + ": bad timestamp \"" + ts + "\"");

        if (trace.device.empty()) trace.device = dev;
        if (dev != trace.device) {
            if (!device.empty()) continue;
            throw DataError(where + ": trace holds several devices; select one with analyze.device");
        }
        if (!trace.timestamps.empty() && t < trace.timestamps.back())
            throw DataError(where + ": timestamp " + ts + " is earlier than the one on line " +
                            std::to_string(last_line));
        trace.timestamps.push_back(t);
        last_line = line_no;
    }
    if (trace.timestamps.empty()) throw DataError(origin + ": trace holds no messages");
    return trace;
}

void write_trace_csv(std::ostream& out, const traffic::Run& run, double slot_seconds, const std::string& device) {
    out << "timestamp_s,device_id\n";
    for (std::size_t i = 0; i < run.size(); ++i) {
        const auto& counts = run[i].counts;
        const auto slots = counts.size();
        for (std::size_t j = 0; j < slots; ++j) {
            const auto c = counts[j];
            for (traffic::Count k = 0; k < c; ++k) {
                const double offset = static_cast<double>(k + 1) / static_cast<double>(c + 1);
                const double t = (static_cast<double>(i * slots + j) + offset) * slot_seconds;
                out << num(t) << ',' << device << '\n';
            }
        }
    }
}

BinnedTrace bin_trace(const ExternalTrace& trace, double slot_seconds, int slots) {
    if (!(slot_seconds > 0.0)) throw ConfigError("slot width must be positive");
    if (slots < 2) throw ConfigError("S must be at least 2");
    if (trace.timestamps.empty()) throw DataError("trace holds no messages");
    auto slot_of = [&](double t) { return static_cast<std::int64_t>(std::floor(t / slot_seconds)); };
    const auto first_slot = slot_of(trace.timestamps.front());
    const auto last_slot = slot_of(trace.timestamps.back());
    BinnedTrace b;
    b.first_interval = floor_div(first_slot, slots);
    const auto n = floor_div(last_slot, slots) - b.first_interval + 1;
    if (n > 10'000'000) throw DataError("trace spans more than 10^7 intervals; widen the slots");
    b.intervals.assign(static_cast<std::size_t>(n), std::vector<traffic::Count>(static_cast<std::size_t>(slots), 0));
    for (double t : trace.timestamps) {
        const auto s = slot_of(t);
        const auto iv = floor_div(s, slots);
        b.intervals[static_cast<std::size_t>(iv - b.first_interval)][static_cast<std::size_t>(s - iv * slots)] += 1;
    }
    return b;
}

std::vector<AnalyzeRow> analyze(const BinnedTrace& binned, double alpha) {
    attacker::DetectorConfig cfg;
    cfg.mode = attacker::DetectorMode::chi_square;
    cfg.alpha = alpha;
    cfg.validate();
    std::vector<AnalyzeRow> rows;
    rows.reserve(binned.intervals.size());
    for (std::size_t i = 0; i < binned.intervals.size(); ++i) {
        const auto& counts = binned.intervals[i];
        const auto v = attacker::test_counts(counts, cfg);
        rows.push_back({binned.first_interval + static_cast<std::int64_t>(i), attacker::dispersion(counts).dispersion,
                        v.flagged, v.threshold});
    }
    return rows;
}

// ---------------------------------------------------------------------------

void cmd_solve(const RunConfig& rc, Format format, std::ostream& out) {
    const auto cost = obfuscator::costs(rc.model, rc.normalizer);
    const auto s = obfuscator::solve_strategy(cost, rc.knowledge, rc.budget);
    if (format == Format::json) {
        auto j = ordered_json::parse(obfuscator::strategy_json(s, rc.model, rc.knowledge));
        j["C_f"] = cost.fake_cost;
        j["C_wf"] = cost.waterfill_cost;
        j["meta"] = meta(rc);
        out << j.dump(2) << '\n';
        return;
    }
    out << header_line(rc) << '\n'
        << "P_wf,P_f,epsilon,cost,feasible_optimal,degenerate,S,lambda,I,R_p,P_tp,P_tn,C_f,C_wf\n"
        << num(s.waterfill_prob) << ',' << num(s.fake_prob) << ',' << num(s.epsilon) << ',' << num(s.cost) << ','
        << s.feasible_optimal << ',' << s.degenerate << ',' << rc.model.slots << ',' << num(rc.model.lambda) << ','
        << num(rc.model.intensity) << ',' << num(rc.model.anomaly_rate) << ',' << num(rc.knowledge.true_positive)
        << ',' << num(rc.knowledge.true_negative) << ',' << num(cost.fake_cost) << ',' << num(cost.waterfill_cost)
        << '\n';
}

namespace {

void emit_reports(const RunConfig& rc, Format format, std::ostream& out,
                  const std::vector<experiment::MetricsReport>& reports) {
    if (format == Format::json) {
        ordered_json j;
        j["meta"] = meta(rc);
        j["cells"] = ordered_json::parse(experiment::reports_json(reports));
        out << j.dump(2) << '\n';
        return;
    }
    out << header_line(rc) << '\n';
    experiment::write_sweep_csv(out, reports);
}

struct CacheFile {
    attacker::H1Cache cache;
    std::string path;

    explicit CacheFile(const RunConfig& rc) : cache(rc.h1_samples, derive_seed(rc.seed, 0x4831)), path(rc.h1_cache) {
        if (!path.empty() && std::filesystem::exists(path)) cache.load(path);
    }
    void save() const {
        if (!path.empty() && cache.size() > 0) cache.save(path);
    }
};

}  // namespace

void cmd_sweep(const RunConfig& rc, Format format, std::ostream& out) {
    CacheFile h1(rc);
    const auto reports = experiment::run_sweep(rc.sweep(), &h1.cache);
    h1.save();
    emit_reports(rc, format, out, reports);
}

void cmd_simulate(const RunConfig& rc, Format format, std::ostream& out, std::ostream* run_out,
                  std::ostream* trace_out) {
    auto spec = rc.cell();
    // Same stream as the matching cell of a sweep with this seed.
    spec.seed = experiment::cell_seed(rc.seed, rc.model.anomaly_rate, rc.model.intensity);
    CacheFile h1(rc);
    const auto report = experiment::run_cell(spec, &h1.cache);
    h1.save();
    emit_reports(rc, format, out, {report});

    if (run_out == nullptr && trace_out == nullptr) return;
    // Regenerate the evaluated run from the same sub-streams as run_cell.
    const auto cost = obfuscator::costs(spec.model, spec.normalizer);
    const auto clean = traffic::gen_run(spec.model, spec.n_intervals, derive_seed(spec.seed, 1));
    const auto run = obfuscator::apply_strategy(clean, report.strategy, spec.knowledge, cost, derive_seed(spec.seed, 2));
    if (run_out != nullptr) {
        *run_out << header_line(rc) << '\n';
        traffic::write_run_csv(*run_out, run);
    }
    if (trace_out != nullptr) {
        *trace_out << header_line(rc) << '\n';
        write_trace_csv(*trace_out, run, rc.slot_seconds, rc.device.empty() ? "sim" : rc.device);
    }
}

void cmd_analyze(const RunConfig& rc, const std::string& trace_path, Format format, std::ostream& out) {
    std::ifstream in(trace_path);
    if (!in) throw DataError("cannot open trace " + trace_path);
    const auto trace = read_trace_csv(in, rc.device, trace_path);
    const auto rows = analyze(bin_trace(trace, rc.slot_seconds, rc.model.slots), rc.alpha);
    if (format == Format::json) {
        ordered_json j;
        j["meta"] = meta(rc);
        j["device"] = trace.device;
        auto arr = ordered_json::array();
        for (const auto& r : rows)
            arr.push_back({{"interval", r.interval}, {"D", r.dispersion}, {"flagged", r.flagged}, {"threshold", r.threshold}});
        j["intervals"] = std::move(arr);
        out << j.dump(2) << '\n';
        return;
    }
    out << header_line(rc) << '\n' << "interval,D,flagged,threshold\n";
    for (const auto& r : rows)
        out << r.interval << ',' << num(r.dispersion) << ',' << (r.flagged ? 1 : 0) << ',' << num(r.threshold) << '\n';
}

void cmd_posterior(const RunConfig& rc, const std::string& fixture_path, bool metrics, std::size_t samples,
                   Format format, std::ostream& out) {
    const auto f = trace::load_fixture(fixture_path);
    try {
        if (metrics) {
            const auto ae = trace::average_error(f.prior, f.mechanism, f.distance, samples, derive_seed(rc.seed, 1));
            const auto ce = trace::conditional_entropy(f.prior, f.mechanism, samples, derive_seed(rc.seed, 2));
            if (format == Format::json) {
                ordered_json j;
                j["meta"] = meta(rc);
                j["fixture"] = fixture_path;
                for (auto [name, e] : {std::pair{"average_error", ae}, std::pair{"conditional_entropy_bits", ce}})
                    j[name] = {{"value", e.value}, {"std_error", e.std_error}, {"samples", e.samples}, {"exact", e.exact}};
                j["prior_entropy_bits"] = f.prior.entropy_bits();
                out << j.dump(2) << '\n';
                return;
            }
            out << header_line(rc) << '\n' << "metric,value,std_error,samples,exact\n";
            out << "average_error," << num(ae.value) << ',' << num(ae.std_error) << ',' << ae.samples << ','
                << ae.exact << '\n';
            out << "conditional_entropy_bits," << num(ce.value) << ',' << num(ce.std_error) << ',' << ce.samples
                << ',' << ce.exact << '\n';
            return;
        }
        if (!f.observed) throw DataError(fixture_path + ": fixture has no \"observed\" trace");
        const auto table = trace::posterior_table(f.prior, f.mechanism, *f.observed);
        if (format == Format::json) {
            ordered_json j;
            j["meta"] = meta(rc);
            j["fixture"] = fixture_path;
            auto arr = ordered_json::array();
            for (std::size_t m = 0; m < table.size(); ++m) {
                auto times = ordered_json::array();
                for (auto t : table[m].candidate.ticks()) times.push_back(f.grid.to_seconds(t));
                arr.push_back({{"mask", m}, {"candidate", std::move(times)}, {"posterior", table[m].p}});
            }
            j["posterior"] = std::move(arr);
            out << j.dump(2) << '\n';
            return;
        }
        out << header_line(rc) << '\n' << "mask,candidate,posterior\n";
        for (std::size_t m = 0; m < table.size(); ++m)
            out << m << ',' << describe_seconds(f.grid, table[m].candidate.ticks()) << ',' << num(table[m].p) << '\n';
    } catch (const InconsistentModel& e) {
        throw InconsistentModel(fixture_path + ": " + e.what());
    }
}

void cmd_costs(const RunConfig& rc, Format format, std::ostream& out) {
    const auto rows =
        experiment::cost_curves(rc.model.slots, rc.cost_lambdas, rc.cost_intensities, rc.cost_ks, rc.normalizer);
    if (format == Format::json) {
        ordered_json j;
        j["meta"] = meta(rc);
        auto arr = ordered_json::array();
        for (const auto& r : rows)
            arr.push_back({{"k", r.k}, {"S", r.slots}, {"lambda", r.lambda}, {"I", r.intensity}, {"C_f", jnum(r.fake_cost)},
                           {"C_wf", jnum(r.waterfill_cost)}, {"wf_feasible", r.waterfill_feasible}});
        j["rows"] = std::move(arr);
        out << j.dump(2) << '\n';
        return;
    }
    out << header_line(rc) << '\n';
    experiment::write_cost_csv(out, rows);
}

// ---------------------------------------------------------------------------

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "Configuration file");
    sub->add_option("--seed", c.seed, "Base seed (random and logged when omitted)");
    sub->add_option("--out", c.out, "Output path (stdout when omitted)");
    sub->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--set", c.overrides, "Override a config value, e.g. --set traffic.S=20");
}

class Output {
public:
    Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
        if (path.empty()) return;
        file_.open(path);
        if (!file_) throw ConfigError("cannot write " + path);
        stream_ = &file_;
    }
    std::ostream& get() { return *stream_; }
    void finish(const std::string& path) {
        stream_->flush();
        if (!*stream_) throw std::runtime_error("write to " + (path.empty() ? std::string("stdout") : path) + " failed");
    }

private:
    std::ofstream file_;
    std::ostream* stream_;
};

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"LPWAN traffic leakage simulator"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    Common common;
    auto* solve = app.add_subcommand("solve", "Solve the obfuscation strategy for one cell");
    auto* sweep = app.add_subcommand("sweep", "Run the (R_p, I) grid and write one record per cell");
    auto* simulate = app.add_subcommand("simulate", "Run a single cell");
    auto* analyze_cmd = app.add_subcommand("analyze", "Dispersion test on an external timestamp trace");
    auto* posterior = app.add_subcommand("posterior", "Posterior table or privacy metrics of a trace fixture");
    auto* costs = app.add_subcommand("costs", "Relative cost curves of fakes and waterfilling");
    for (auto* sub : {solve, sweep, simulate, analyze_cmd, posterior, costs}) add_common(sub, common);

    std::string run_out, trace_out, trace_in, fixture;
    bool metrics = false;
    std::size_t samples = 100000;
    simulate->add_option("--run-out", run_out, "Also write the obfuscated run as CSV");
    simulate->add_option("--trace-out", trace_out, "Also write the run as a timestamp_s,device_id trace");
    analyze_cmd->add_option("--trace", trace_in, "Trace CSV with header timestamp_s,device_id")->required();
    posterior->add_option("--fixture", fixture, "Fixture JSON")->required();
    posterior->add_flag("--metrics", metrics, "Report average error and conditional entropy instead");
    posterior->add_option("--samples", samples, "Monte-Carlo samples when enumeration is too large")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        Config cfg;
        if (!common.config.empty()) cfg = Config::load(common.config);
        for (const auto& o : common.overrides) cfg.set_override(o);

        Seed seed = 0;
        if (common.seed) {
            seed = *common.seed;
        } else if (cfg.has("seed")) {
            seed = cfg.get_u64("seed", 0);
        } else {
            std::random_device rd;
            seed = (static_cast<Seed>(rd()) << 32) ^ rd();
            err << "leakctl: no seed given, using seed=" << seed << '\n';
        }
        const auto rc = RunConfig::from(cfg, seed);

        auto* sub = app.get_subcommands().front();
        const bool default_json = sub == solve;
        const Format format =
            common.format.empty() ? (default_json ? Format::json : Format::csv) : parse_format(common.format);

        Output dest(common.out, out);
        if (sub == solve) {
            cmd_solve(rc, format, dest.get());
        } else if (sub == sweep) {
            cmd_sweep(rc, format, dest.get());
        } else if (sub == simulate) {
            std::optional<Output> runs, traces;
            if (!run_out.empty()) runs.emplace(run_out, out);
            if (!trace_out.empty()) traces.emplace(trace_out, out);
            cmd_simulate(rc, format, dest.get(), runs ? &runs->get() : nullptr, traces ? &traces->get() : nullptr);
            if (runs) runs->finish(run_out);
            if (traces) traces->finish(trace_out);
        } else if (sub == analyze_cmd) {
            cmd_analyze(rc, trace_in, format, dest.get());
        } else if (sub == posterior) {
            cmd_posterior(rc, fixture, metrics, samples, format, dest.get());
        } else {
            cmd_costs(rc, format, dest.get());
        }
        dest.finish(common.out);
        return kExitOk;
    } catch (const DataError& e) {
        err << "leakctl: data error: " << e.what() << '\n';
        return kExitData;
    } catch (const ConfigError& e) {
        err << "leakctl: config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::domain_error& e) {
        err << "leakctl: config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "leakctl: internal error: " << e.what() << '\n';
        return kExitInternal;
    } catch (...) {
        err << "leakctl: internal error\n";
        return kExitInternal;
    }
}

}  // namespace leakage::cli
