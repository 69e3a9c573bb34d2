#include "micrlb/config.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace micrlb;

namespace {
RunConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}
}  // namespace

TEST(Config, DefaultsRoundTrip) {
    const std::string text = render_config(RunConfig{});
    EXPECT_EQ(render_config(parse(text)), text);
    for (const auto& key : config_keys()) EXPECT_NE(text.find(key + " = "), std::string::npos) << key;
}

TEST(Config, ParsesValues) {
    const RunConfig c = parse(
        "# comment\n"
        "scenario.anchor_count = 4\n"
        "channel.frequency = 13e6\n"
        "scenario.anchor_placement = explicit\n"
        "scenario.anchor_positions = 1 2 3; 4 5 6\n"
        "sweep.param = coil_turns\n"
        "sweep.values = 10, 20\n"
        "sweep.series_param = noise_sigma\n"
        "sweep.series_values = 0.05,0.3\n"
        "sweep.fim_mode = paper\n");
    EXPECT_EQ(c.scenario.layout.anchor_count, 4);
    EXPECT_EQ(c.scenario.budget.channel.frequency, 13e6);
    ASSERT_EQ(c.scenario.layout.anchor_positions.size(), 2u);
    EXPECT_EQ(c.scenario.layout.anchor_positions[1], Vec3(4, 5, 6));
    const SweepConfig s = c.sweep_config();
    EXPECT_EQ(s.param, SweepParam::CoilTurns);
    EXPECT_EQ(s.values, (std::vector<double>{10, 20}));
    EXPECT_EQ(s.series_param, SweepParam::NoiseSigma);
    EXPECT_EQ(s.mc.mode, FimMode::Paper);
}

TEST(Config, UnknownKeyIsNamed) {
    try {
        parse("scenario.thing_count = 5\nscenario.thingz = 4\n");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key(), "scenario.thingz");
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(Config, RejectsDuplicatesAndBadValues) {
    EXPECT_THROW(parse("scenario.seed = 1\nscenario.seed = 2\n"), ConfigError);
    EXPECT_THROW(parse("scenario.thing_count = many\n"), ConfigError);
    EXPECT_THROW(parse("just some words\n"), ConfigError);
    EXPECT_THROW(parse("sweep.fim_mode = fancy\n"), ConfigError);
}
