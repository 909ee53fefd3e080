#include "leakage/obfuscator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <json.hpp>

#include "leakage/error.hpp"
#include "leakage/kernels.hpp"

namespace leakage::obfuscator {

std::string_view to_string(WaterfillNormalizer n) { return n == WaterfillNormalizer::summed ? "summed" : "anomalous"; }

WaterfillNormalizer parse_normalizer(std::string_view text) {
    if (text == "summed") return WaterfillNormalizer::summed;
    if (text == "anomalous") return WaterfillNormalizer::anomalous;
    throw ConfigError("obfuscator.wf_normalizer must be summed or anomalous, got \"" + std::string(text) + "\"");
}

double expected_dispersion(std::span<const double> slot_rates) {
    if (slot_rates.size() < 2) throw ConfigError("expected dispersion needs at least two slots");
    const auto s = static_cast<double>(slot_rates.size());
    double sum = 0.0, sum_sq = 0.0;
    for (double r : slot_rates) {
        sum += r;
        sum_sq += r * r;
    }
    const double mean = sum / s;
    if (!(mean > 0.0)) throw ConfigError("expected dispersion needs a positive mean rate");
    // Poisson noise contributes the mean; unequal rates add between-slot variance.
    const double variance = (sum_sq / s - mean * mean) * s / (s - 1.0) + mean;
    return variance / mean;
}

double anomaly_dispersion(const IntervalModel& model) {
    model.validate();
    const double excess = model.lambda * (model.intensity - 1.0);
    return 1.0 + excess * excess / ((model.slots - 1) * model.lambda + model.anomaly_lambda());
}

double solve_fake_rate(const IntervalModel& model, double k) {
    model.validate();
    if (!(k >= 1.0) || !std::isfinite(k)) throw ConfigError("fake-anomaly factor k must be at least 1");
    if (k == 1.0) return 0.0;
    // D' = 1 + x^2 / (S lambda + x) = k  =>  x^2 - (k-1) x - (k-1) S lambda = 0
    const double b = k - 1.0;
    const double c = (k - 1.0) * model.slots * model.lambda;
    return 0.5 * (b + std::sqrt(b * b + 4.0 * c));
}

double waterfill_rate_for_target(const IntervalModel& model, double target_dispersion) {
    const double d0 = anomaly_dispersion(model);
    if (!(target_dispersion <= d0 * (1.0 + 1e-12)))
        throw ConfigError("waterfilling cannot raise the dispersion above the unobfuscated anomaly");
    if (target_dispersion < 1.0 - 1e-12)
        throw InfeasibleTarget("dispersion target below 1 cannot be reached by waterfilling");
    const double target = std::clamp(target_dispersion, 1.0, d0);
    if (target == d0) return 0.0;

    // With gap u = lambda I - (lambda + w) between the anomalous and the quiet
    // slots: D' = 1 + u^2 / (S lambda I - (S - 1) u). Take the root with u >= 0.
    const double peak = model.anomaly_lambda();
    const double b = (target - 1.0) * (model.slots - 1);
    const double c = (target - 1.0) * model.slots * peak;
    const double gap = c == 0.0 ? 0.0 : 2.0 * c / (b + std::sqrt(b * b + 4.0 * c));
    return std::max(0.0, model.lambda * (model.intensity - 1.0) - gap);
}

double solve_waterfill_rate(const IntervalModel& model, double k) {
    model.validate();
    if (!(k >= 1.0) || !std::isfinite(k)) throw ConfigError("waterfilling factor k must be at least 1");
    if (k == 1.0) return 0.0;
    const double target = anomaly_dispersion(model) / k;
    if (target < 1.0 - 1e-12)
        throw InfeasibleTarget("dividing the anomaly dispersion by k = " + std::to_string(k) +
                               " would need D' < 1");
    return waterfill_rate_for_target(model, std::max(target, 1.0));
}

double fake_relative_cost(const IntervalModel& model, double lambda_fa) {
    return lambda_fa / (model.lambda * model.slots);
}

double waterfill_relative_cost(const IntervalModel& model, double lambda_wf, WaterfillNormalizer normalizer) {
    const double denom = normalizer == WaterfillNormalizer::summed
                             ? model.lambda * model.slots + model.anomaly_lambda()
                             : model.lambda * (model.slots - 1) + model.anomaly_lambda();
    return lambda_wf * (model.slots - 1) / denom;
}

CostModel costs(const IntervalModel& model, WaterfillNormalizer normalizer) {
    model.validate();
    CostModel c;
    c.model = model;
    c.normalizer = normalizer;
    c.target_dispersion = anomaly_dispersion(model);
    c.lambda_fa = solve_fake_rate(model, c.target_dispersion);
    c.lambda_wf = waterfill_rate_for_target(model, 1.0);
    c.fake_cost = fake_relative_cost(model, c.lambda_fa);
    c.waterfill_cost = waterfill_relative_cost(model, c.lambda_wf, normalizer);
    return c;
}

void KnowledgeModel::validate() const {
    if (!(true_positive > 0.0 && true_positive <= 1.0)) throw ConfigError("knowledge.P_tp must lie in (0, 1]");
    if (!(true_negative > 0.0 && true_negative <= 1.0)) throw ConfigError("knowledge.P_tn must lie in (0, 1]");
}

double expected_cost(double waterfill_prob, double fake_prob, const CostModel& cost, double anomaly_rate) {
    return anomaly_rate * waterfill_prob * cost.waterfill_cost + (1.0 - anomaly_rate) * fake_prob * cost.fake_cost;
}

bool power_ok(const Strategy& strategy, const CostModel& cost, double anomaly_rate, double budget) {
    return expected_cost(strategy.waterfill_prob, strategy.fake_prob, cost, anomaly_rate) <= budget;
}

attacker::ClassMasses class_masses(double anomaly_rate, const KnowledgeModel& knowledge, double waterfill_prob,
                                   double fake_prob) {
    const double hidden = knowledge.true_positive * waterfill_prob;  // anomaly made to look like baseline
    const double faked = knowledge.true_negative * fake_prob;        // baseline made to look like an anomaly
    const double rp = anomaly_rate;
    const double rn = 1.0 - anomaly_rate;
    return {rp * (1.0 - hidden), rp * hidden, rn * faked, rn * (1.0 - faked)};
}

PosteriorRatios posterior_ratios(double anomaly_rate, const KnowledgeModel& knowledge, double waterfill_prob,
                                 double fake_prob) {
    const double rp = anomaly_rate;
    const double rn = 1.0 - anomaly_rate;
    const double a = knowledge.true_positive * waterfill_prob;
    const double f = knowledge.true_negative * fake_prob;
    PosteriorRatios r;
    const double clear = rn * (1.0 - f) + rp * a;
    const double flagged = rp * (1.0 - a) + rn * f;
    r.given_clear = clear > 0.0 ? rp * a / clear : rp;
    r.given_flagged = flagged > 0.0 ? rp * (1.0 - a) / flagged : rp;
    return r;
}

double epsilon(double anomaly_rate, const KnowledgeModel& knowledge, double waterfill_prob, double fake_prob) {
    const double rp = anomaly_rate;
    const double rn = 1.0 - anomaly_rate;
    const double a = knowledge.true_positive * waterfill_prob;
    const double f = knowledge.true_negative * fake_prob;
    const double clear = rn * (1.0 - f) + rp * a;
    const double flagged = rp * (1.0 - a) + rn * f;
    if (clear <= 0.0 || flagged <= 0.0) return 0.0;
    const auto r = posterior_ratios(anomaly_rate, knowledge, waterfill_prob, fake_prob);
    if (r.given_clear == 0.0) return r.given_flagged == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return r.given_flagged / r.given_clear - 1.0;
}

namespace {

constexpr double kGridStep = 1e-3;

Strategy make_strategy(double wf, double fake, const CostModel& cost, const KnowledgeModel& knowledge,
                       bool optimal) {
    Strategy s;
    s.waterfill_prob = wf;
    s.fake_prob = fake;
    s.cost = expected_cost(wf, fake, cost, cost.model.anomaly_rate);
    s.epsilon = epsilon(cost.model.anomaly_rate, knowledge, wf, fake);
    s.feasible_optimal = optimal;
    return s;
}

}  // namespace

Strategy solve_strategy(const CostModel& cost, const KnowledgeModel& knowledge, double budget) {
    cost.model.validate();
    knowledge.validate();
    if (!(budget >= 0.0) || !std::isfinite(budget)) throw ConfigError("obfuscator.budget must be non-negative");

    const double rp = cost.model.anomaly_rate;
    const double rn = 1.0 - rp;
    if (rp == 0.0 || rp == 1.0) {
        Strategy s;
        s.feasible_optimal = true;
        s.degenerate = true;
        return s;
    }

    const double tp = knowledge.true_positive;
    const double tn = knowledge.true_negative;
    auto fake_on_line = [&](double wf) { return std::clamp((1.0 - tp * wf) / tn, 0.0, 1.0); };

    // Zero-bias line tp * P_wf + tn * P_f = 1 restricted to the unit square.
    // Cost is linear along it, so the cheapest point is an endpoint.
    const double lo = std::max(0.0, (1.0 - tn) / tp);
    const double hi = std::min(1.0, 1.0 / tp);
    if (lo <= hi) {
        const double cost_lo = expected_cost(lo, fake_on_line(lo), cost, rp);
        const double cost_hi = expected_cost(hi, fake_on_line(hi), cost, rp);
        const double wf = cost_hi < cost_lo ? hi : lo;
        if (std::min(cost_lo, cost_hi) <= budget) {
            return make_strategy(wf, fake_on_line(wf), cost, knowledge, true);
        }
    }

    // No zero-bias point is affordable. The feasible region is convex and
    // contains the origin, so it lies entirely on the epsilon > 0 side, and
    // epsilon falls as P_f grows: the optimum sits on the upper budget edge.
    const double wf_max = cost.waterfill_cost > 0.0 ? std::min(1.0, budget / (rp * cost.waterfill_cost)) : 1.0;
    auto fake_max = [&](double wf) {
        if (cost.fake_cost <= 0.0) return 1.0;
        return std::clamp((budget - rp * wf * cost.waterfill_cost) / (rn * cost.fake_cost), 0.0, 1.0);
    };
    auto objective = [&](double wf) { return std::abs(epsilon(rp, knowledge, wf, fake_max(wf))); };

    double best_wf = 0.0;
    double best_eps = std::numeric_limits<double>::infinity();
    double best_cost = std::numeric_limits<double>::infinity();
    auto consider = [&](double wf) {
        const double e = objective(wf);
        const double c = expected_cost(wf, fake_max(wf), cost, rp);
        const double tol = 1e-12 * std::max(1.0, best_eps);
        if (e < best_eps - tol || (std::abs(e - best_eps) <= tol && c < best_cost)) {
            best_wf = wf;
            best_eps = e;
            best_cost = c;
        }
    };
    const auto steps = static_cast<long>(std::ceil(wf_max / kGridStep));
    for (long i = 0; i <= steps; ++i) consider(std::min(wf_max, static_cast<double>(i) * kGridStep));

    // Golden-section refinement inside the neighbouring grid cells.
    double a = std::max(0.0, best_wf - kGridStep);
    double b = std::min(wf_max, best_wf + kGridStep);
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 100 && b - a > 1e-15; ++it) {
        const double x1 = b - g * (b - a);
        const double x2 = a + g * (b - a);
        if (objective(x1) <= objective(x2)) b = x2;
        else a = x1;
    }
    consider(0.5 * (a + b));

    if (!std::isfinite(best_eps)) {
        // Nothing can be hidden at all (e.g. zero budget): spend nothing.
        return make_strategy(0.0, 0.0, cost, knowledge, false);
    }
    return make_strategy(best_wf, fake_max(best_wf), cost, knowledge, false);
}

Strategy solve_strategy(const IntervalModel& model, const KnowledgeModel& knowledge, double budget) {
    return solve_strategy(costs(model), knowledge, budget);
}

void obfuscate_interval(traffic::IntervalObservation& obs, const Strategy& strategy, const KnowledgeModel& knowledge,
                        const CostModel& cost, Seed seed) {
    using traffic::Count;
    using traffic::ObfAction;
    Rng rng(seed);
    const int slots = static_cast<int>(obs.counts.size());

    const double u_predict = rng.uniform();
    const double u_act = rng.uniform();
    const bool predicted_anomaly =
        obs.is_anomaly ? u_predict < knowledge.true_positive : !(u_predict < knowledge.true_negative);

    std::uniform_int_distribution<int> pick(0, slots - 1);
    auto add = [&](int slot, double rate) {
        if (rate <= 0.0) return;
        std::poisson_distribution<Count> dummies(rate);
        const Count d = dummies(rng);
        obs.counts[slot] += d;
        obs.dummy_counts[slot] += d;
    };

    if (predicted_anomaly) {
        if (!(u_act < strategy.waterfill_prob)) return;
        // A mispredicted baseline has no real peak; the obfuscator skips the slot it believes anomalous.
        const int peak = obs.is_anomaly ? *obs.anomaly_slot : pick(rng);
        for (int s = 0; s < slots; ++s) {
            if (s != peak) add(s, cost.lambda_wf);
        }
        obs.obf_action = ObfAction::waterfilled;
    } else {
        if (!(u_act < strategy.fake_prob)) return;
        add(pick(rng), cost.lambda_fa);
        obs.obf_action = ObfAction::fake_anomaly;
    }
}

traffic::Run apply_strategy(const traffic::Run& run, const Strategy& strategy, const KnowledgeModel& knowledge,
                            const CostModel& cost, Seed seed) {
    knowledge.validate();
    auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!in_unit(strategy.waterfill_prob) || !in_unit(strategy.fake_prob))
        throw ConfigError("strategy probabilities must lie in [0, 1]");
    traffic::Run out = run;
    kernels::omp::obfuscate(out, strategy, knowledge, cost, seed);
    return out;
}

namespace {

double anomaly_normalizer(const CostModel& cost) {
    const auto& m = cost.model;
    return cost.normalizer == WaterfillNormalizer::summed ? m.lambda * m.slots + m.anomaly_lambda()
                                                         : m.lambda * (m.slots - 1) + m.anomaly_lambda();
}

}  // namespace

double realized_relative_cost(const traffic::Run& run, const CostModel& cost) {
    if (run.empty()) return 0.0;
    const double baseline_norm = cost.model.lambda * cost.model.slots;
    const double anomaly_norm = anomaly_normalizer(cost);
    double sum = 0.0;
    for (const auto& obs : run) {
        sum += static_cast<double>(obs.dummy_total()) / (obs.is_anomaly ? anomaly_norm : baseline_norm);
    }
    return sum / static_cast<double>(run.size());
}

double expected_realized_cost(const Strategy& strategy, const KnowledgeModel& knowledge, const CostModel& cost) {
    const auto& m = cost.model;
    const double rp = m.anomaly_rate;
    const double rn = 1.0 - rp;
    const double wf_dummies = cost.lambda_wf * (m.slots - 1);
    const double fa_dummies = cost.lambda_fa;
    const double tp = knowledge.true_positive;
    const double tn = knowledge.true_negative;
    const double on_anomaly =
        tp * strategy.waterfill_prob * wf_dummies + (1.0 - tp) * strategy.fake_prob * fa_dummies;
    const double on_baseline =
        tn * strategy.fake_prob * fa_dummies + (1.0 - tn) * strategy.waterfill_prob * wf_dummies;
    return rp * on_anomaly / anomaly_normalizer(cost) + rn * on_baseline / (m.lambda * m.slots);
}

std::string strategy_json(const Strategy& strategy, const IntervalModel& model, const KnowledgeModel& knowledge) {
    nlohmann::ordered_json j;
    j["P_wf"] = strategy.waterfill_prob;
    j["P_f"] = strategy.fake_prob;
    j["epsilon"] = strategy.epsilon;
    j["cost"] = strategy.cost;
    j["feasible_optimal"] = strategy.feasible_optimal;
    j["degenerate"] = strategy.degenerate;
    j["model"] = {{"S", model.slots}, {"lambda", model.lambda}, {"I", model.intensity}, {"R_p", model.anomaly_rate}};
    j["knowledge"] = {{"P_tp", knowledge.true_positive}, {"P_tn", knowledge.true_negative}};
    return j.dump(2);
}

}  // namespace leakage::obfuscator
