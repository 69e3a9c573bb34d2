#include "micrlb/experiments.hpp"
#include "micrlb/parallel.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace micrlb;
using micrlb::testing::rel_err;

namespace {
Scenario small_scenario() {
    Scenario s;
    s.layout.thing_count = 8;
    return s;
}
}  // namespace

TEST(MonteCarlo, SingleTrialMatchesDirect) {
    const Scenario s = small_scenario();
    const MonteCarloSummary m = monte_carlo_crlb(s, 1, 9);
    const Deployment d = generate_deployment(s.layout, trial_seed(9, 0));
    const MeasurementGraph g = build_measurement_graph(d, s.layout, s.budget);
    const CrlbReport r = crlb_standard(fim_standard(g, d.all_positions()));
    EXPECT_EQ(m.mean, r.aggregate_bound);
    EXPECT_EQ(m.trials, 1u);
    EXPECT_EQ(m.std, 0.0);
}

TEST(MonteCarlo, SummaryMatchesTrials) {
    const Scenario s = small_scenario();
    const auto bounds = trial_bounds(s, 40, 3, {});
    double sum = 0.0, sq = 0.0;
    for (const auto& b : bounds) sum += *b;
    const double mean = sum / 40.0;
    for (const auto& b : bounds) sq += (*b - mean) * (*b - mean);
    const MonteCarloSummary m = monte_carlo_crlb(s, 40, 3);
    EXPECT_LT(rel_err(m.mean, mean), 1e-13);
    EXPECT_LT(rel_err(m.std, std::sqrt(sq / 39.0)), 1e-12);
}

TEST(MonteCarlo, IndependentOfThreadCount) {
    const Scenario s = small_scenario();
    const unsigned saved = thread_count();
    set_thread_count(1);
    const auto one = trial_bounds(s, 30, 5, {});
    set_thread_count(4);
    const auto four = trial_bounds(s, 30, 5, {});
    set_thread_count(saved);
    EXPECT_EQ(one, four);
}

TEST(MonteCarlo, TwoAnchorsAreAllSingular) {
    Scenario s = small_scenario();
    s.layout.anchor_count = 2;
    EXPECT_THROW(monte_carlo_crlb(s, 5, 1), AllTrialsSingularError);
}

TEST(MonteCarlo, SeedsAreDistinct) {
    EXPECT_NE(trial_seed(1, 0), trial_seed(1, 1));
    EXPECT_NE(trial_seed(1, 0), trial_seed(2, 0));
    EXPECT_EQ(trial_seed(1, 7), trial_seed(1, 7));
}

TEST(ApplyParameter, Semantics) {
    const Scenario base;
    EXPECT_EQ(apply_parameter(base, SweepParam::CoilTurns, 30).budget.thing_coil.turns, 30);
    EXPECT_EQ(apply_parameter(base, SweepParam::CoilTurns, 30).budget.anchor_coil.turns, 20);
    const Scenario r = apply_parameter(base, SweepParam::CoilRadius, 0.03);
    EXPECT_EQ(r.budget.thing_coil.radius, 0.03);
    EXPECT_EQ(r.budget.anchor_coil.radius, 0.03);
    EXPECT_EQ(apply_parameter(base, SweepParam::Frequency, 13e6).budget.channel.frequency, 13e6);
    EXPECT_EQ(apply_parameter(base, SweepParam::AnchorCount, 4).layout.anchor_count, 4);
    EXPECT_EQ(apply_parameter(base, SweepParam::NoiseSigma, 0.3).budget.noise.sigma, 0.3);
    EXPECT_EQ(apply_parameter(base, SweepParam::TransmitPower, 0.2).budget.channel.transmit_power, 0.2);
}

TEST(Sweep, ValidationAndRanges) {
    SweepConfig c;
    c.values = {0.05, 5.0};
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c.allow_out_of_range = true;
    EXPECT_NO_THROW(c.validate());
    c.values.clear();
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Sweep, NoiseCurveIsMonotoneAndQuadratic) {
    SweepConfig c;
    c.base = small_scenario();
    c.values = {0.4, 0.1, 0.2};
    c.trials = 20;
    const SweepResult r = run_sweep(c);
    ASSERT_EQ(r.series.size(), 1u);
    const auto& rows = r.series[0].rows;
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].param, 0.1);
    EXPECT_LT(rel_err(rows[1].mean, 4.0 * rows[0].mean), 1e-9);
    EXPECT_LT(rel_err(rows[2].mean, 16.0 * rows[0].mean), 1e-9);
}

TEST(Sweep, SingularPointsReportStatus) {
    SweepConfig c;
    c.base = small_scenario();
    c.param = SweepParam::AnchorCount;
    c.values = {2, 3};
    c.trials = 5;
    const auto& rows = run_sweep(c).series[0].rows;
    EXPECT_EQ(rows[0].status, "all_singular");
    EXPECT_EQ(rows[0].singular, 5u);
    EXPECT_EQ(rows[1].status, "ok");
}

TEST(Sweep, SeriesLabels) {
    SweepConfig c;
    c.base = small_scenario();
    c.values = {0.1};
    c.series_param = SweepParam::Frequency;
    c.series_values = {13e6, 7e6};
    c.trials = 3;
    const SweepResult r = run_sweep(c);
    ASSERT_EQ(r.series.size(), 2u);
    EXPECT_EQ(r.series[0].label, "frequency=13000000");
    // bound scales as 1/omega^2
    EXPECT_LT(rel_err(r.series[1].rows[0].mean, r.series[0].rows[0].mean * (13.0 * 13.0) / 49.0), 1e-9);
}

TEST(Csv, RoundTripAndPrecision) {
    const std::vector<SweepRow> rows{{0.05, 1.0 / 3.0, 2.0 / 3.0, 500, 0, "ok"},
                                     {0.7, std::numeric_limits<double>::infinity(), 0.0, 0, 500, "all_singular"}};
    std::stringstream out;
    emit_csv(rows, out);
    std::string header;
    std::getline(out, header);
    EXPECT_EQ(header, kCsvHeader);
    std::string line;
    std::getline(out, line);
    EXPECT_EQ(line, "0.05,0.333333333,0.666666667,500,0,ok");
    out.clear();
    out.seekg(0);
    const auto back = parse_csv(out);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].trials, 500u);
    EXPECT_LT(rel_err(back[0].mean, 1.0 / 3.0), 1e-9);
    EXPECT_EQ(back[1].status, "all_singular");
    EXPECT_TRUE(std::isinf(back[1].mean));
}

TEST(Efficiency, RatioTendsToOneAtLowNoise) {
    Scenario s;
    s.layout.anchor_placement = AnchorPlacement::Explicit;
    s.layout.anchor_count = 6;
    s.layout.anchor_positions = {{3, 0, 1800}, {-3, 0, 1800}, {0, 3, 1800}, {0, -3, 1800}, {0, 0, 1797}, {0, 0, 1803}};
    s.layout.fracture_width = s.layout.fracture_length = s.layout.fracture_thickness = 2.0;
    s.layout.thing_count = 1;
    EfficiencyOptions o;
    o.sigma_rel = {0.0, 1e-4};
    const EfficiencyStudy st = efficiency_study(s, 200, 3, o);
    ASSERT_EQ(st.rows.size(), 2u);
    EXPECT_EQ(st.rows[0].sigma, 0.0);
    EXPECT_LT(st.rows[0].rmse, 1e-9);
    EXPECT_FALSE(st.rows[1].violates);
    EXPECT_NEAR(st.rows[1].ratio(), 1.0, 0.25);
}
