#pragma once

// JSON fixtures for the trace model (see docs/fixtures.md):
//
//   {
//     "tick": 1.0,
//     "window": [0, 4],
//     "prior": [{"trace": [1.0], "p": 0.6}, {"trace": [1.0, 2.0], "p": 0.4}],
//     "mechanism": "identity" | {"fill-to": [...]} | {"table": [...]}
//                  | {"bernoulli": {"p": 0.3, "slots": [...]}},
//     "distance": "cardinality" | {"anomaly-count": {"bin": 2, "threshold": 2}},
//     "observed": [1.0, 2.0]
//   }
//
// Times are in seconds and are rounded onto the tick grid.

#include <optional>
#include <string>
#include <string_view>

#include "leakage/trace.hpp"

namespace leakage::trace {

struct Fixture {
    std::string origin;
    TimeGrid grid;
    Window window;
    TracePrior prior;
    Mechanism mechanism;
    DistanceFn distance = DistanceFn::cardinality();
    std::optional<MessageTrace> observed;
};

// Throws DataError naming `origin` on malformed input.
Fixture parse_fixture(std::string_view json_text, const std::string& origin = "<fixture>");
Fixture load_fixture(const std::string& path);

}  // namespace leakage::trace
