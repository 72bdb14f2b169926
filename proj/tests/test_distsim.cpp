#include "biphoton/distsim.hpp"

#include <gtest/gtest.h>

#include <sstream>
#include <string>

using namespace biphoton;

namespace {

TimelineConfig base_config(std::size_t steps) {
    TimelineConfig c;
    c.d1 = 3.0e6;
    c.d2 = 4.5e6;
    c.d12 = 6.0e6;
    c.cadence = 1e-3;
    c.steps = steps;
    return c;
}

SimulationResult run(const TimelineConfig &c, const ControlMode &m, std::uint64_t seed) {
    RandomStream rng(seed);
    return run_timeline(c, m, rng);
}

}  // namespace

TEST(Timeline, feedback_is_ideal) {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
        const auto r = run(base_config(1000), TwoWayFeedback{}, seed);
        ASSERT_TRUE(r.report);
        EXPECT_EQ(r.report->noncr_fraction, 1.0);
        for (const auto &e : r.events) EXPECT_EQ(e.cr, 1);
    }
}

TEST(Timeline, makespan_matches_closed_form) {
    for (std::size_t m : {0u, 1u, 7u, 1000u}) {
        const auto c = base_config(m);
        EXPECT_EQ(run(c, OneWayQuantum{}, 1).makespan, closed_form_makespan(c, false));
        EXPECT_EQ(run(c, OneWayClassical{}, 1).makespan, closed_form_makespan(c, false));
        EXPECT_EQ(run(c, TwoWayFeedback{}, 1).makespan, closed_form_makespan(c, true));
    }
    const auto c = base_config(1000);
    EXPECT_DOUBLE_EQ(closed_form_makespan(c, false), 4.5e6 / kSpeedOfLight + 1000 * 1e-3);
}

TEST(Timeline, one_way_makespan_ignores_cross_site_distance) {
    auto near = base_config(1000);
    auto far = near;
    far.d12 = 1e7;
    near.d12 = 0;
    EXPECT_EQ(run(near, OneWayQuantum{}, 9).makespan, run(far, OneWayQuantum{}, 9).makespan);
    EXPECT_LT(run(near, TwoWayFeedback{}, 9).makespan, run(far, TwoWayFeedback{}, 9).makespan);
}

TEST(Timeline, zero_distances_equal_makespans) {
    TimelineConfig c;
    c.cadence = 0.01;
    c.steps = 250;
    const double expected = 250 * 0.01;
    EXPECT_DOUBLE_EQ(run(c, OneWayClassical{}, 1).makespan, expected);
    EXPECT_DOUBLE_EQ(run(c, OneWayQuantum{}, 1).makespan, expected);
    EXPECT_DOUBLE_EQ(run(c, TwoWayFeedback{}, 1).makespan, expected);
}

TEST(Timeline, feedback_overhead_is_m_times_cross_latency) {
    const auto c = base_config(10'000);
    const double gap = run(c, TwoWayFeedback{}, 5).makespan - run(c, OneWayQuantum{}, 5).makespan;
    const double expected = 10'000 * c.d12 / c.signal_speed;
    EXPECT_NEAR(gap, expected, 1e-12 * expected);
}

TEST(Timeline, chains_match_run_assembly) {
    const auto c = base_config(5000);
    for (const auto &spec : {"det:+-+-", "quantum:corrected", "mix:0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.2,0,0,0,0,0,0,0"}) {
        const auto s = parse_strategy(spec);
        ControlMode mode = std::holds_alternative<QuantumStrategy>(s) ? ControlMode{OneWayQuantum{s}}
                                                                      : ControlMode{OneWayClassical{s}};
        const auto sim = run(c, mode, 123);
        RandomStream rng(123);
        EXPECT_EQ(sim.chains, run_assembly(s, c.steps, rng)) << spec;
    }
}

TEST(Timeline, makespan_monotone_in_each_parameter) {
    const auto c = base_config(100);
    for (bool fb : {false, true}) {
        const ControlMode mode = fb ? ControlMode{TwoWayFeedback{}} : ControlMode{OneWayQuantum{}};
        const double base = run(c, mode, 1).makespan;
        auto bigger = [&](auto mutate) {
            auto d = c;
            mutate(d);
            return run(d, mode, 1).makespan;
        };
        EXPECT_GE(bigger([](TimelineConfig &d) { d.d1 *= 3; }), base);
        EXPECT_GE(bigger([](TimelineConfig &d) { d.d2 *= 3; }), base);
        EXPECT_GE(bigger([](TimelineConfig &d) { d.cadence *= 2; }), base);
        EXPECT_GE(bigger([](TimelineConfig &d) { d.steps += 10; }), base);
        EXPECT_GE(bigger([](TimelineConfig &d) { d.d12 *= 2; }), base);
    }
}

TEST(Timeline, event_times) {
    const auto c = base_config(3);
    const auto r = run(c, TwoWayFeedback{}, 1);
    const double lag1 = c.d1 / c.signal_speed, lag2 = c.d2 / c.signal_speed, cross = c.d12 / c.signal_speed;
    for (std::size_t k = 0; k < 3; ++k) {
        const auto &e = r.events[k];
        EXPECT_EQ(e.step, k);
        EXPECT_DOUBLE_EQ(e.emit_time, k * (c.cadence + cross));
        EXPECT_DOUBLE_EQ(e.arrive1_time, e.emit_time + lag1);
        EXPECT_DOUBLE_EQ(e.arrive2_time, e.emit_time + std::max(lag2, lag1 + cross));
    }
    const auto q = run(c, OneWayQuantum{}, 1);
    EXPECT_DOUBLE_EQ(q.events[2].arrive2_time, 2 * c.cadence + lag2);
}

TEST(Timeline, rejects_invalid_config) {
    RandomStream rng(1);
    for (auto mutate : {+[](TimelineConfig &c) { c.d1 = -1; }, +[](TimelineConfig &c) { c.d12 = -1; },
                        +[](TimelineConfig &c) { c.signal_speed = 0; }, +[](TimelineConfig &c) { c.cadence = -1; },
                        +[](TimelineConfig &c) { c.d2 = std::nan(""); }}) {
        auto c = base_config(10);
        mutate(c);
        EXPECT_THROW(run_timeline(c, TwoWayFeedback{}, rng), InvalidConfig);
        EXPECT_THROW(compare_modes(c, 1), InvalidConfig);
    }
}

TEST(Timeline, zero_steps) {
    const auto r = run(base_config(0), OneWayQuantum{}, 1);
    EXPECT_FALSE(r.report);
    EXPECT_TRUE(r.events.empty());
    EXPECT_DOUBLE_EQ(r.makespan, 4.5e6 / kSpeedOfLight);
}

TEST(EventLog, header_and_row_count) {
    const auto r = run(base_config(4), OneWayQuantum{}, 1);
    std::ostringstream out;
    write_event_log(out, r.events);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "step,emit_time,arrive1_time,arrive2_time,type1,type2,s1,s2,cr");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 4);
}

TEST(CompareModes, ratio_and_feedback_row) {
    const auto c = base_config(10'000);
    const auto cmp = compare_modes(c, 7);
    ASSERT_EQ(cmp.rows.size(), 3u);
    EXPECT_EQ(*cmp.rows[0].exact_noncr, 0.75);
    EXPECT_NEAR(*cmp.rows[1].exact_noncr, (2 + std::numbers::sqrt2) / 4, 1e-12);
    ASSERT_TRUE(cmp.ratio);
    EXPECT_NEAR(*cmp.ratio, (2 + std::numbers::sqrt2) / 3, 1e-12);
    EXPECT_NEAR(*cmp.ratio, 1.13807, 1e-3);
    EXPECT_EQ(*cmp.rows[2].empirical_noncr, 1.0);
    const double gap = cmp.rows[2].makespan - cmp.rows[0].makespan;
    EXPECT_NEAR(gap, 10'000 * c.d12 / c.signal_speed, 1e-12 * gap);
    EXPECT_EQ(cmp.rows[0].makespan, cmp.rows[1].makespan);
}

TEST(CompareModes, zero_steps_is_undefined) {
    const auto c = base_config(0);
    const auto cmp = compare_modes(c, 7);
    for (const auto &row : cmp.rows) {
        EXPECT_FALSE(row.exact_noncr);
        EXPECT_FALSE(row.empirical_noncr);
        EXPECT_DOUBLE_EQ(row.makespan, 4.5e6 / kSpeedOfLight);
    }
    EXPECT_FALSE(cmp.ratio);
}
