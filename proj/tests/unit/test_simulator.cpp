#include <gtest/gtest.h>

#include <cmath>

#include "wlancap/analytic.hpp"
#include "wlancap/delay.hpp"
#include "wlancap/error.hpp"
#include "wlancap/experiments.hpp"
#include "wlancap/simulator.hpp"

using namespace wlancap;

namespace {

Scenario equal_slot(int n = 50, int m = 1) { return reference_scenario(AccessModel::EqualSlot, n, m); }

SimConfig config(std::uint64_t seed, std::int64_t slots, std::int64_t warmup = 0) {
    SimConfig c;
    c.seed = seed;
    c.total_slots = slots;
    c.warmup_slots = warmup;
    return c;
}

}  // namespace

TEST(Simulator, ConfigValidation) {
    EXPECT_THROW(config(1, 0).validate(), InvalidArgument);
    EXPECT_THROW(config(1, 100, 100).validate(), InvalidArgument);
    EXPECT_NO_THROW(config(1, 100, 99).validate());
    const auto f = CollectFlags::parse("delay-samples,pc-by-state");
    EXPECT_TRUE(f.delay_samples);
    EXPECT_TRUE(f.pc_by_state);
    EXPECT_FALSE(f.queue_samples);
    EXPECT_THROW(CollectFlags::parse("everything"), InvalidArgument);
}

TEST(Simulator, WindowsAreRoundedAndCapped) {
    EXPECT_EQ(sim_window(MacParams(16, 2.0), 3), 128u);
    EXPECT_EQ(sim_window(MacParams(16, 1.5), 1), 24u);
    EXPECT_EQ(sim_window(MacParams(16, 2.0, std::nullopt, 64.0), 5), 64u);
}

TEST(Simulator, SameSeedGivesIdenticalResults) {
    const auto s = equal_slot().with_offered_load(90.0);
    auto c = config(11, 200'000, 10'000);
    c.collect = CollectFlags::parse("delay-samples,pc-by-state,queue-samples");
    const auto a = run(s, c);
    const auto b = run(s, c);
    EXPECT_EQ(a.delivered, b.delivered);
    EXPECT_EQ(a.collided, b.collided);
    EXPECT_EQ(a.delay.s2, b.delay.s2);
    EXPECT_EQ(a.delay_samples, b.delay_samples);
    EXPECT_EQ(a.queue_histogram, b.queue_histogram);
    c.seed = 12;
    EXPECT_NE(run(s, c).delay.s1, a.delay.s1);
}

TEST(Simulator, LoneStationAccessDelayIsTheMeanCountdownPlusOneSlot) {
    const auto s = equal_slot(1);
    auto c = config(3, 1'000'000);
    c.saturated = true;
    const auto r = run(s, c);
    const double t = s.timing().t_succ_us();
    const double expected = t * (s.mac().w0() - 1) / 2 + t;
    EXPECT_EQ(r.collided, 0u);
    EXPECT_NEAR(r.access_ne.mean() / expected, 1.0, 0.01);
}

TEST(Simulator, FullMprNeverCollides) {
    const auto r = run(equal_slot(5, 5).with_offered_load(500.0), config(5, 300'000));
    EXPECT_GT(r.transmissions, 0u);
    EXPECT_EQ(r.collided, 0u);
    EXPECT_EQ(r.p_c_overall, 0.0);
}

TEST(Simulator, EveryArrivalIsAccountedFor) {
    for (const auto& s : {equal_slot().with_offered_load(120.0),
                          equal_slot().with_offered_load(120.0).with_mac(MacParams(16, 2.0, 3))}) {
        const auto r = run(s, config(9, 400'000, 50'000));
        EXPECT_EQ(r.total_arrivals, r.total_delivered + r.total_dropped + r.final_queued);
        EXPECT_LE(r.delivered, r.total_delivered);
    }
}

TEST(Simulator, RetryLimitDropsPackets) {
    const auto s = equal_slot().with_offered_load(200.0).with_mac(MacParams(16, 2.0, 1));
    const auto r = run(s, config(4, 400'000, 40'000));
    EXPECT_GT(r.dropped, 0u);
    EXPECT_NEAR(r.loss_rate, static_cast<double>(r.dropped) / (r.dropped + r.delivered), 1e-12);
}

TEST(PcByState, LoneStationHasNoCollisionsAnywhere) {
    auto c = config(1, 200'000);
    c.saturated = true;
    const auto pc = measure_pc_by_state(equal_slot(1), c);
    for (const auto& b : pc.by_stage) EXPECT_EQ(b.tally.collisions, 0u);
    for (const auto& b : pc.by_occupancy) EXPECT_EQ(b.tally.collisions, 0u);
    EXPECT_EQ(pc.stage_variance, 0.0);
}

TEST(PcByState, SeedsAgreeOnTheSpread) {
    const auto s = equal_slot(10).with_offered_load(183.0);
    const auto a = measure_pc_by_state(s, config(1, 5'000'000, 100'000));
    const auto b = measure_pc_by_state(s, config(2, 5'000'000, 100'000));
    ASSERT_GT(a.stage_variance, 0.0);
    ASSERT_GT(b.stage_variance, 0.0);
    EXPECT_LT(a.stage_variance / b.stage_variance, 3.0);
    EXPECT_LT(b.stage_variance / a.stage_variance, 3.0);
}

TEST(Collapse, StableLoadsAreCarried) {
    const auto s = equal_slot();
    const double s_s = throughput_pps(saturation_tau(s), s);
    const auto rows = collapse_experiment(s, {0.3 * s_s, 0.6 * s_s}, {1'000'000}, {1, 2});
    for (const auto& row : rows) EXPECT_NEAR(row.throughput_pps / row.offered_pps, 1.0, 0.01) << row.offered_pps;
}

TEST(Collapse, OverloadSettlesNearSaturationThroughput) {
    const auto s = reference_scenario(AccessModel::Basic);
    const double s_s = throughput_pps(saturation_tau(s), s);
    const double s_star = optimal_tau(s).s_star_bps / s.payload_bits();
    const auto rows = collapse_experiment(s, {2.0 * s_star}, {2'000'000}, {7});
    EXPECT_NEAR(rows.front().throughput_pps / s_s, 1.0, 0.04);
}

TEST(Immeasurability, ProbeIsDeterministicAndOrdered) {
    const auto s = equal_slot().with_offered_load(80.0);
    const auto a = immeasurability_probe(s, 3, 100'000, 10'000, 21);
    const auto b = immeasurability_probe(s, 3, 100'000, 10'000, 21, 2);
    ASSERT_EQ(a.delay.run_means_us.size(), 3u);
    EXPECT_EQ(a.delay.run_means_us, b.delay.run_means_us);
    EXPECT_EQ(a.delay.run_means_us[1], run(s, config(22, 100'000, 10'000)).delay.mean());
}

TEST(Dispersion, CoefficientOfVariation) {
    const auto d = dispersion({1.0, 2.0, 3.0});
    EXPECT_DOUBLE_EQ(d.mean_us, 2.0);
    EXPECT_NEAR(d.stddev_us, 1.0, 1e-12);
    EXPECT_NEAR(d.cov, 0.5, 1e-12);
}

TEST(QueueLength, ArrivalsSeeTheAnalyticDistribution) {
    const auto s = equal_slot().with_offered_load(60.0);
    auto c = config(5, 4'000'000, 100'000);
    c.collect.queue_samples = true;
    const auto r = run(s, c);
    double total = 0, pgf = 0;
    for (std::size_t q = 0; q < r.queue_histogram.size(); ++q) {
        total += static_cast<double>(r.queue_histogram[q]);
        pgf += static_cast<double>(r.queue_histogram[q]) * std::pow(0.5, static_cast<double>(q));
    }
    const double tau = stable_operating_point(s).tau;
    EXPECT_NEAR(pgf / total, queue_length_pgf(0.5, s, tau), 0.01 * queue_length_pgf(0.5, s, tau));
}

TEST(WindowCap, FixedWindowMatchesTheAnalyticMeanDelay) {
    const auto s = equal_slot().with_offered_load(60.0).with_mac(MacParams(16, 2.0, std::nullopt, 16.0));
    const auto r = run(s, config(8, 3'000'000, 100'000));
    const auto d = delay_stats(s, stable_operating_point(s).tau);
    ASSERT_TRUE(d.e_d_us.is_finite());
    EXPECT_NEAR(r.delay.mean() / d.e_d_us.value(), 1.0, 0.03);
}
