#include "micrlb/estimator.hpp"
#include "micrlb/fim.hpp"
#include "micrlb/rng.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace micrlb;
using micrlb::testing::star_graph;
using micrlb::testing::tetra_scene;

namespace {
std::vector<Measurement> noiseless(const MeasurementGraph& g, const Positions& p) {
    const auto mu = mean_powers(g, p);
    std::vector<Measurement> m;
    for (std::size_t e = 0; e < mu.size(); ++e) m.push_back({e, mu[e]});
    return m;
}

Positions things_of(const Positions& all, std::size_t anchors) { return {all.begin() + anchors, all.end()}; }
}  // namespace

TEST(Estimator, TruthIsFixedPoint) {
    const MeasurementGraph g = star_graph(4, 2, 1.0, 1e-3, true);
    const Positions p = tetra_scene(2);
    EstimatorOptions o;
    o.truth = things_of(p, 4);
    const EstimateResult r = mle_localize(g, noiseless(g, p), p, o);
    EXPECT_TRUE(r.converged);
    EXPECT_LT(r.final_objective, 1e-20);
    for (double e : r.per_node_error) EXPECT_LT(e, 1e-9);
}

TEST(Estimator, RecoversFromPerturbation) {
    const MeasurementGraph g = star_graph(4, 2, 1.0, 1e-3, false);
    const Positions p = tetra_scene(2);
    Positions start = p;
    start[4] += Vec3(0.5, -0.3, 0.2);
    start[5] += Vec3(-0.3, 0.4, 0.3);
    const EstimateResult r = mle_localize(g, noiseless(g, p), start);
    EXPECT_TRUE(r.converged);
    EXPECT_LT(rmse(r.positions, things_of(p, 4)), 1e-6);
}

TEST(Estimator, ObjectiveNeverIncreases) {
    const MeasurementGraph g = star_graph(4, 1, 1.0, 1e-3);
    const Positions p = tetra_scene(1);
    auto m = noiseless(g, p);
    Rng rng(3);
    for (auto& x : m) x.value += 1e-3 * rng.normal();
    Positions start = p;
    start[4] += Vec3(0.3, 0.3, -0.3);
    EstimatorOptions o;
    double prev = 1e300;
    for (int it : {1, 2, 4, 8, 50}) {
        o.max_iterations = it;
        const double obj = mle_localize(g, m, start, o).final_objective;
        EXPECT_LE(obj, prev);
        prev = obj;
    }
}

TEST(Estimator, MultiStartDeterministicAndAccurate) {
    const MeasurementGraph g = star_graph(4, 1, 1.0, 1e-3);
    const Positions p = tetra_scene(1);
    Positions placeholders = p;
    placeholders[4] = Vec3::Zero();
    EstimatorOptions o;
    o.box = SearchBox{Vec3::Zero(), Vec3(1.5, 1.5, 1.5)};
    const auto m = noiseless(g, p);
    const EstimateResult a = multi_start(g, m, placeholders, 8, 42, o);
    const EstimateResult b = multi_start(g, m, placeholders, 8, 42, o);
    EXPECT_EQ(a.positions, b.positions);
    EXPECT_LT(rmse(a.positions, things_of(p, 4)), 1e-6);
    EXPECT_THROW(multi_start(g, m, placeholders, 4, 1, EstimatorOptions{}), std::invalid_argument);
}

TEST(Estimator, Rmse) {
    EXPECT_DOUBLE_EQ(rmse({{0, 0, 0}, {0, 0, 0}}, {{3, 4, 0}, {0, 0, 0}}), std::sqrt(12.5));
    EXPECT_THROW(rmse({{0, 0, 0}}, {}), std::invalid_argument);
}
