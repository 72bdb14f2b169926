#pragma once

// Discrete-event timeline of one-way control. The CPU broadcasts one control
// signal per step to both growth sites; the two-way baseline instead routes
// site 1's choice to site 2 before site 2 attaches.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <queue>
#include <string>
#include <variant>
#include <vector>

#include "biphoton/assembly.hpp"
#include "biphoton/errors.hpp"
#include "biphoton/random.hpp"
#include "biphoton/strategy.hpp"

namespace biphoton {

inline constexpr double kSpeedOfLight = 2.998e8;

struct TimelineConfig {
    double d1 = 0;   // CPU -> site 1, meters
    double d2 = 0;   // CPU -> site 2, meters
    double d12 = 0;  // site 1 -> site 2, meters
    double signal_speed = kSpeedOfLight;
    double cadence = 0;  // seconds between CPU emissions
    std::size_t steps = 0;

    void validate() const {
        auto finite_nonneg = [](double x) { return std::isfinite(x) && x >= 0; };
        if (!finite_nonneg(d1) || !finite_nonneg(d2) || !finite_nonneg(d12)) {
            throw InvalidConfig("distances must be finite and >= 0");
        }
        if (!std::isfinite(signal_speed) || !(signal_speed > 0)) throw InvalidConfig("signal speed must be > 0");
        if (!finite_nonneg(cadence)) throw InvalidConfig("cadence must be finite and >= 0");
    }
};

struct OneWayClassical {
    Strategy strategy = DeterministicStrategy{};
};
struct OneWayQuantum {
    Strategy strategy = QuantumStrategy{};
};
struct TwoWayFeedback {};

using ControlMode = std::variant<OneWayClassical, OneWayQuantum, TwoWayFeedback>;

inline const char *mode_name(const ControlMode &m) {
    static constexpr const char *names[] = {"one-way-classical", "one-way-quantum", "two-way-feedback"};
    return names[m.index()];
}

/// One row of the per-step event log.
struct StepRecord {
    std::size_t step = 0;
    double emit_time = 0;
    double arrive1_time = 0;
    double arrive2_time = 0;
    MonoblockType type1 = MonoblockType::A;
    MonoblockType type2 = MonoblockType::A;
    int s1 = 1;
    int s2 = 1;
    int cr = 1;
};

struct SimulationResult {
    std::pair<Chain, Chain> chains;
    std::optional<OverlayReport> report;  // empty when steps == 0
    double makespan = 0;
    double per_step_latency = 0;
    std::vector<StepRecord> events;
};

namespace detail {

enum class EventKind { Emit, Arrive1, Arrive2, Complete };

struct Event {
    double time;
    std::size_t step;
    EventKind kind;
    // Earliest time first; ties by step then kind so processing is deterministic.
    friend bool operator>(const Event &x, const Event &y) {
        if (x.time != y.time) return x.time > y.time;
        if (x.step != y.step) return x.step > y.step;
        return static_cast<int>(x.kind) > static_cast<int>(y.kind);
    }
};

}  // namespace detail

/// Runs M steps. Step k is emitted at k*(cadence + extra) and completes at
/// emit + max(d1,d2)/c + cadence + extra, where extra = d12/c for the
/// feedback baseline and 0 otherwise. Shift choices draw from `rng` in the
/// same order as run_assembly, so one-way chains match it seed for seed.
template <BitStream64 G>
SimulationResult run_timeline(const TimelineConfig &config, const ControlMode &mode, G &rng) {
    config.validate();
    const bool feedback = std::holds_alternative<TwoWayFeedback>(mode);
    const double c = config.signal_speed;
    const double lag1 = config.d1 / c;
    const double lag2 = config.d2 / c;
    const double extra = feedback ? config.d12 / c : 0.0;
    const double slot = config.cadence + extra;

    SimulationResult result;
    result.per_step_latency = slot;
    result.events.resize(config.steps);
    result.chains.first.blocks.reserve(config.steps);
    result.chains.second.blocks.reserve(config.steps);

    const Strategy *strategy = nullptr;
    if (auto *m = std::get_if<OneWayClassical>(&mode)) strategy = &m->strategy;
    if (auto *m = std::get_if<OneWayQuantum>(&mode)) strategy = &m->strategy;

    using detail::Event;
    using detail::EventKind;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue;
    if (config.steps > 0) queue.push({0.0, 0, EventKind::Emit});

    double makespan = std::max(lag1, lag2);
    while (!queue.empty()) {
        const Event ev = queue.top();
        queue.pop();
        auto &rec = result.events[ev.step];
        switch (ev.kind) {
            case EventKind::Emit: {
                rec.step = ev.step;
                rec.emit_time = ev.time;
                const auto [c1, c2] = draw_types(rng);
                rec.type1 = c1;
                rec.type2 = c2;
                if (feedback) {
                    // Site 1 always attaches forward; site 2 waits for its report.
                    rec.s1 = +1;
                    rec.s2 = type_pair_sign(c1, c2) * rec.s1;
                } else {
                    const auto o = step(*strategy, c1, c2, rng);
                    rec.s1 = o.s1;
                    rec.s2 = o.s2;
                }
                rec.cr = criticality({c1, c2, Shift(rec.s1), Shift(rec.s2)});
                queue.push({ev.time + lag1, ev.step, EventKind::Arrive1});
                queue.push({ev.time + lag2, ev.step, EventKind::Arrive2});
                queue.push({std::max(lag1, lag2) + static_cast<double>(ev.step + 1) * slot, ev.step,
                            EventKind::Complete});
                if (ev.step + 1 < config.steps) {
                    // Index-based emit times avoid accumulating rounding over long runs.
                    queue.push({static_cast<double>(ev.step + 1) * slot, ev.step + 1, EventKind::Emit});
                }
                break;
            }
            case EventKind::Arrive1:
                rec.arrive1_time = ev.time;
                break;
            case EventKind::Arrive2:
                // In feedback mode site 2 also needs site 1's report.
                rec.arrive2_time = feedback ? std::max(ev.time, rec.emit_time + lag1 + extra) : ev.time;
                break;
            case EventKind::Complete:
                makespan = std::max(makespan, ev.time);
                break;
        }
    }

    for (const auto &rec : result.events) {
        result.chains.first.blocks.push_back({rec.type1, Shift(rec.s1)});
        result.chains.second.blocks.push_back({rec.type2, Shift(rec.s2)});
    }
    if (config.steps > 0) result.report = overlay(result.chains.first, result.chains.second);
    result.makespan = makespan;
    return result;
}

/// max(d1,d2)/c + M*(cadence + extra).
inline double closed_form_makespan(const TimelineConfig &config, bool feedback) {
    const double extra = feedback ? config.d12 / config.signal_speed : 0.0;
    return std::max(config.d1, config.d2) / config.signal_speed +
           static_cast<double>(config.steps) * (config.cadence + extra);
}

inline void write_event_log(std::ostream &out, const std::vector<StepRecord> &events) {
    out << "step,emit_time,arrive1_time,arrive2_time,type1,type2,s1,s2,cr\n";
    char buf[256];
    for (const auto &e : events) {
        std::snprintf(buf, sizeof buf, "%zu,%.9e,%.9e,%.9e,%c,%c,%d,%d,%d\n", e.step, e.emit_time, e.arrive1_time,
                      e.arrive2_time, type_char(e.type1), type_char(e.type2), e.s1, e.s2, e.cr);
        out << buf;
    }
}

struct ModeRow {
    ControlMode mode;
    std::optional<double> exact_noncr;
    std::optional<double> empirical_noncr;
    double makespan = 0;
};

struct ModeComparison {
    std::vector<ModeRow> rows;   // classical, quantum, feedback
    std::optional<double> ratio;  // exact quantum / exact classical
};

/// Classical row uses det:++++ (an optimal deterministic strategy), quantum
/// row the corrected settings. Run r uses seed replication_seed(seed, r).
inline ModeComparison compare_modes(const TimelineConfig &config, std::uint64_t seed) {
    config.validate();
    ModeComparison cmp;
    const ControlMode modes[] = {OneWayClassical{}, OneWayQuantum{}, TwoWayFeedback{}};
    for (std::size_t r = 0; r < 3; ++r) {
        RandomStream rng(replication_seed(seed, r));
        const auto sim = run_timeline(config, modes[r], rng);
        ModeRow row{modes[r], std::nullopt, std::nullopt, sim.makespan};
        if (sim.report) {
            row.empirical_noncr = sim.report->noncr_fraction;
            if (r == 0) row.exact_noncr = exact_value(DeterministicStrategy{}).exact_noncr;
            if (r == 1) row.exact_noncr = exact_value(QuantumStrategy{}).exact_noncr;
            if (r == 2) row.exact_noncr = 1.0;
        }
        cmp.rows.push_back(std::move(row));
    }
    if (cmp.rows[0].exact_noncr && cmp.rows[1].exact_noncr) {
        cmp.ratio = *cmp.rows[1].exact_noncr / *cmp.rows[0].exact_noncr;
    }
    return cmp;
}

}  // namespace biphoton
