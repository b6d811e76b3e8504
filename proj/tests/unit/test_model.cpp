#include <gtest/gtest.h>

#include <sstream>

#include "wlancap/csv.hpp"
#include "wlancap/error.hpp"
#include "wlancap/model.hpp"
#include "wlancap/rng.hpp"
#include "wlancap/scenario_io.hpp"

using namespace wlancap;

TEST(Timing, EqualSlotDurationFromReferenceComponents) {
    const auto t = make_slot_timing(reference_components(), AccessModel::EqualSlot);
    EXPECT_NEAR(t.t_succ_us(), 20.0 + 244.0 / 6.0 + 8184.0 / 6.0, 1e-9);
    EXPECT_NEAR(t.t_succ_us(), 1424.67, 0.005);
    EXPECT_EQ(t.t_idle_us(), t.t_coll_us());
    EXPECT_EQ(t.t_coll_us(), t.t_succ_us());
}

TEST(Timing, BasicAccessUsesTheMiniSlotAndAddsAckToSuccess) {
    const auto c = reference_components();
    const auto t = make_slot_timing(c, AccessModel::Basic);
    EXPECT_DOUBLE_EQ(t.t_idle_us(), 9.0);
    EXPECT_LT(t.t_coll_us(), t.t_succ_us());
    EXPECT_NEAR(t.t_succ_us() - t.t_coll_us(), c.sifs_us + c.bits_us(c.ack_bits), 1e-9);
}

TEST(Timing, RtsCtsCollisionsAreShort) {
    const auto t = make_slot_timing(reference_components(), AccessModel::RtsCts);
    const auto basic = make_slot_timing(reference_components(), AccessModel::Basic);
    EXPECT_LT(t.t_coll_us(), basic.t_coll_us());
    EXPECT_GT(t.t_succ_us(), basic.t_succ_us());
}

TEST(Timing, PropagationIsAddedOnlyWhenRequested) {
    auto c = reference_components();
    c.propagation_us = 1.0;
    const auto off = make_slot_timing(c, AccessModel::Basic);
    const auto on = make_slot_timing(c, AccessModel::Basic, {true});
    EXPECT_DOUBLE_EQ(on.t_succ_us() - off.t_succ_us(), 1.0);
    EXPECT_DOUBLE_EQ(on.t_coll_us() - off.t_coll_us(), 1.0);
    EXPECT_DOUBLE_EQ(on.t_idle_us(), off.t_idle_us());
}

TEST(Timing, InvariantsAreEnforced) {
    EXPECT_THROW(SlotTiming(0.0, 1.0, 1.0), InvalidArgument);
    EXPECT_THROW(SlotTiming(1.0, 2.0, 1.0, AccessModel::EqualSlot), InvalidArgument);
    EXPECT_THROW(SlotTiming(1.0, 3.0, 2.0, AccessModel::Basic), InvalidArgument);
    auto c = reference_components();
    c.data_rate_bps = 0.0;
    EXPECT_THROW(c.validate(), InvalidArgument);
    c = reference_components();
    c.propagation_us = -1.0;
    EXPECT_THROW(c.validate(), InvalidArgument);
    EXPECT_THROW(make_slot_timing(reference_components(), AccessModel::Custom), InvalidArgument);
}

TEST(MacParams, RejectsNonExponentialBackoff) {
    EXPECT_THROW(MacParams(16, 1.0), InvalidArgument);
    EXPECT_THROW(MacParams(0, 2.0), InvalidArgument);
    EXPECT_THROW(MacParams(16, 2.0, -1), InvalidArgument);
    EXPECT_THROW(MacParams(16, 2.0, std::nullopt, 8.0), InvalidArgument);
    EXPECT_THROW(MacParams(16, 2.0, std::nullopt, 100.0), InvalidArgument);
    EXPECT_NO_THROW(MacParams(16, 2.0, std::nullopt, 1024.0));
}

TEST(MacParams, WindowsGrowGeometricallyUpToTheCap) {
    const MacParams mac(16, 2.0, std::nullopt, 128.0);
    EXPECT_EQ(mac.doubling_stages(), 3);
    EXPECT_DOUBLE_EQ(mac.window(0), 16.0);
    EXPECT_DOUBLE_EQ(mac.window(2), 64.0);
    EXPECT_DOUBLE_EQ(mac.window(3), 128.0);
    EXPECT_DOUBLE_EQ(mac.window(9), 128.0);
    EXPECT_DOUBLE_EQ(MacParams(16, 1.5).window(2), 36.0);
}

TEST(Scenario, MprCapabilityIsClampedToTheStationCount) {
    const auto s = reference_scenario(AccessModel::EqualSlot, 5, 9);
    EXPECT_EQ(s.m(), 5);
    EXPECT_EQ(s.with_n(3).m(), 3);
}

TEST(Scenario, OfferedLoadIsDerivedFromThePerStationRate) {
    const auto s = reference_scenario(AccessModel::Basic).with_offered_load(100.0);
    EXPECT_DOUBLE_EQ(s.lambda_pps(), 2.0);
    EXPECT_DOUBLE_EQ(s.offered_load_pps(), 100.0);
    EXPECT_THROW(s.with_lambda(-1.0), InvalidArgument);
}

// --- scenario documents -------------------------------------------------------

TEST(ScenarioIo, ParsesAFullDocument) {
    const auto s = parse_scenario(R"({
        "name": "x", "n": 20, "m": 2, "offered_load_pps": 40,
        "timing": {"model": "basic", "components": {"difs_us": 50}},
        "mac": {"w0": 32, "r": 3, "retry_limit": 6, "cw_max": 288}
    })");
    EXPECT_EQ(s.n(), 20);
    EXPECT_EQ(s.m(), 2);
    EXPECT_DOUBLE_EQ(s.lambda_pps(), 2.0);
    EXPECT_EQ(s.timing().model(), AccessModel::Basic);
    auto c = reference_components();
    c.difs_us = 50;
    EXPECT_EQ(s.timing(), make_slot_timing(c, AccessModel::Basic));
    EXPECT_EQ(s.mac(), MacParams(32, 3.0, 6, 288.0));
}

TEST(ScenarioIo, ErrorsNameTheOffendingField) {
    const auto field_of = [](const char* text) {
        try {
            parse_scenario(text);
        } catch (const ScenarioError& e) {
            return e.field();
        }
        return std::string("<none>");
    };
    EXPECT_EQ(field_of(R"({"n": 0})"), "n");
    EXPECT_EQ(field_of(R"({"n": "ten"})"), "n");
    EXPECT_EQ(field_of(R"({"mac": {"r": 1}})"), "mac.r");
    EXPECT_EQ(field_of(R"({"mac": {"w0": 16, "cw_max": 100}})"), "mac.cw_max");
    EXPECT_EQ(field_of(R"({"timing": {"model": "warp"}})"), "timing.model");
    EXPECT_EQ(field_of(R"({"timing": {"components": {"sifs_us": -1}}})"), "timing.components");
    EXPECT_EQ(field_of(R"({"timing": {"t_idle_us": 9}})"), "timing.t_coll_us");
    EXPECT_EQ(field_of(R"({"colour": "blue"})"), "colour");
    EXPECT_EQ(field_of(R"({"lambda_pps": 1, "offered_load_pps": 2})"), "offered_load_pps");
    EXPECT_EQ(field_of("[1, 2]"), "<document>");
    EXPECT_EQ(field_of("{"), "<document>");
}

TEST(ScenarioIo, SerialisationRoundTripsExactly) {
    const auto original = reference_scenario(AccessModel::RtsCts, 17, 3)
                              .with_mac(MacParams(8, 2.5, 4, 8 * 2.5 * 2.5))
                              .with_offered_load(123.456);
    const auto back = parse_scenario(scenario_to_json(original));
    EXPECT_EQ(back.n(), original.n());
    EXPECT_EQ(back.m(), original.m());
    EXPECT_EQ(back.lambda_pps(), original.lambda_pps());
    EXPECT_EQ(back.timing(), original.timing());
    EXPECT_EQ(back.mac(), original.mac());
}

TEST(ScenarioIo, MissingFileIsReported) {
    EXPECT_THROW(load_scenario("/nonexistent/scenario.json"), ScenarioError);
}

// --- CSV ----------------------------------------------------------------------

TEST(Csv, NumbersRoundTripAndNonFiniteValuesUseLiterals) {
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
    EXPECT_EQ(format_number(INFINITY), "inf");
    EXPECT_EQ(format_number(-INFINITY), "-inf");
    EXPECT_EQ(format_number(NAN), "nan");
}

TEST(Csv, QuotesOnlyWhenNeededAndChecksRowWidth) {
    std::ostringstream os;
    CsvWriter w(os, {"a", "b"});
    w.cell(1.5).cell("x,y");
    w.end_row();
    w.cell(std::int64_t{2}).cell("say \"hi\"");
    w.end_row();
    EXPECT_EQ(os.str(), "a,b\n1.5,\"x,y\"\n2,\"say \"\"hi\"\"\"\n");
    w.cell(1.0);
    EXPECT_THROW(w.end_row(), std::exception);
}

// --- random streams -------------------------------------------------------------

TEST(Rng, StreamsAreReproducibleAndDistinct) {
    Rng a(7, 0), b(7, 0), c(7, 1), d(8, 0);
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    EXPECT_NE(x, c.next_u64());
    EXPECT_NE(x, d.next_u64());
}

TEST(Rng, MappingsHaveTheRightMoments) {
    Rng g(42);
    const int n = 400000;
    double su = 0, se = 0, sb = 0;
    for (int i = 0; i < n; ++i) {
        const double u = g.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        su += u;
        se += g.exponential(2.0);
        const auto k = g.below(10);
        ASSERT_LT(k, 10u);
        sb += static_cast<double>(k);
    }
    EXPECT_NEAR(su / n, 0.5, 0.003);
    EXPECT_NEAR(se / n, 0.5, 0.004);
    EXPECT_NEAR(sb / n, 4.5, 0.03);
    EXPECT_EQ(g.below(1), 0u);
}
