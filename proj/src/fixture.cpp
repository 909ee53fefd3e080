#include "leakage/fixture.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "leakage/error.hpp"

namespace leakage::trace {

namespace {

using nlohmann::json;

Ticks read_ticks(const json& j, const TimeGrid& grid) {
    if (!j.is_array()) throw DataError("expected an array of timestamps");
    Ticks ticks;
    for (const auto& t : j) ticks.push_back(grid.to_tick(t.get<double>()));
    std::sort(ticks.begin(), ticks.end());
    return ticks;
}

Mechanism read_mechanism(const json& j, const TimeGrid& grid, const Window& window) {
    auto in_window = [&](const Ticks& ticks) {
        for (Tick t : ticks) {
            if (!window.contains(t)) throw DataError("mechanism places a dummy outside the window");
        }
        return ticks;
    };
    if (j.is_string()) {
        const auto name = j.get<std::string>();
        if (name == "identity") return Mechanism::identity();
        throw DataError("unknown mechanism \"" + name + "\"");
    }
    if (!j.is_object() || j.size() != 1) throw DataError("mechanism must be a name or a single-key object");
    if (j.contains("fill-to")) return Mechanism::fill_to(in_window(read_ticks(j.at("fill-to"), grid)));
    if (j.contains("bernoulli")) {
        const auto& b = j.at("bernoulli");
        return Mechanism{mechanism::BernoulliFill{b.at("p").get<double>(), in_window(read_ticks(b.at("slots"), grid))}};
    }
    if (j.contains("table")) {
        mechanism::Table table;
        for (const auto& row : j.at("table")) {
            mechanism::Table::Row r;
            r.given = read_ticks(row.at("given"), grid);
            for (const auto& out : row.at("emit")) {
                r.emit.push_back({in_window(read_ticks(out.at("trace"), grid)), out.at("p").get<double>()});
            }
            table.rows.push_back(std::move(r));
        }
        return Mechanism{std::move(table)};
    }
    throw DataError("unknown mechanism kind \"" + j.begin().key() + "\"");
}

DistanceFn read_distance(const json& j, const TimeGrid& grid) {
    if (j.is_string()) {
        const auto name = j.get<std::string>();
        if (name == "cardinality") return DistanceFn::cardinality();
        throw DataError("unknown distance \"" + name + "\"");
    }
    if (j.is_object() && j.contains("anomaly-count")) {
        const auto& a = j.at("anomaly-count");
        const Tick bin = grid.to_tick(a.at("bin").get<double>());
        return DistanceFn::anomaly_count(bin, a.at("threshold").get<int>());
    }
    throw DataError("distance must be \"cardinality\" or {\"anomaly-count\": {...}}");
}

}  // namespace

Fixture parse_fixture(std::string_view json_text, const std::string& origin) {
    try {
        const json j = json::parse(json_text);
        TimeGrid grid{j.value("tick", 1.0)};
        if (!(grid.tick_seconds > 0.0)) throw DataError("tick must be positive");

        const auto& w = j.at("window");
        if (!w.is_array() || w.size() != 2) throw DataError("window must be [t_a, t_b]");
        Window window{grid.to_tick(w[0].get<double>()), grid.to_tick(w[1].get<double>())};

        std::vector<TracePrior::Entry> support;
        for (const auto& e : j.at("prior")) {
            support.push_back({MessageTrace(window, read_ticks(e.at("trace"), grid)), e.at("p").get<double>()});
        }
        TracePrior prior(window, std::move(support));
        Mechanism mech = read_mechanism(j.at("mechanism"), grid, window);

        // Every trace the prior can produce needs a defined mechanism row.
        for (const auto& entry : prior.support()) (void)mech.outcomes(entry.trace.ticks());

        Fixture f{origin, grid, window, std::move(prior), std::move(mech), DistanceFn::cardinality(), std::nullopt};
        if (j.contains("distance")) f.distance = read_distance(j.at("distance"), grid);
        if (j.contains("observed"))
            f.observed = MessageTrace(window, read_ticks(j.at("observed"), grid), TraceKind::observed);
        return f;
    } catch (const json::exception& e) {
        throw DataError(origin + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError(origin + ": " + e.what());
    } catch (const ConfigError& e) {
        throw DataError(origin + ": " + e.what());
    }
}

Fixture load_fixture(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open fixture " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_fixture(buf.str(), path);
}

}  // namespace leakage::trace
