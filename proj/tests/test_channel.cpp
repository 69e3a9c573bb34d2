#include "micrlb/channel.hpp"
#include "micrlb/deployment.hpp"
#include "micrlb/rng.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <vector>

using namespace micrlb;
using micrlb::testing::rel_err;

namespace {
const CoilSpec kCoil{20, 0.02};
}

// Reference values evaluated independently at 50 significant digits.
TEST(Coupling, GoldenDefaults) {
    const double k = coupling_constant(kCoil, kCoil, ChannelParams{});
    EXPECT_LT(rel_err(k, 4.421582771688033e-08), 1e-14);
}

TEST(Coupling, ZeroAngleGivesExactlyZero) {
    ChannelParams p;
    p.misalignment_angle = 0.0;
    EXPECT_EQ(coupling_constant(kCoil, kCoil, p), 0.0);
}

TEST(Coupling, Scalings) {
    const ChannelParams base;
    const double k0 = coupling_constant(kCoil, kCoil, base);
    EXPECT_LT(rel_err(coupling_constant(kCoil, {40, 0.02}, base), 2.0 * k0), 1e-14);
    EXPECT_LT(rel_err(coupling_constant(kCoil, {20, 0.04}, base), 8.0 * k0), 1e-14);
    EXPECT_LT(rel_err(coupling_constant({20, 0.04}, kCoil, base), 8.0 * k0), 1e-14);
    ChannelParams p = base;
    p.transmit_power = 0.2;
    EXPECT_LT(rel_err(coupling_constant(kCoil, kCoil, p), 2.0 * k0), 1e-14);
    p = base;
    p.frequency = 14e6;
    EXPECT_LT(rel_err(coupling_constant(kCoil, kCoil, p), 2.0 * k0), 1e-14);
    p = base;
    p.misalignment_angle = kPi / 6.0;
    EXPECT_LT(rel_err(coupling_constant(kCoil, kCoil, p), 0.25 * k0), 1e-14);
    // transmitter turns do not enter
    EXPECT_EQ(coupling_constant({5, 0.02}, kCoil, base), k0);
}

TEST(Coupling, RejectsBadInputs) {
    EXPECT_THROW(CoilSpec({20, 0.0}).validate(), std::domain_error);
    EXPECT_THROW(CoilSpec({0, 0.02}).validate(), std::domain_error);
    ChannelParams p;
    p.frequency = -1.0;
    EXPECT_THROW(p.validate(), std::domain_error);
}

TEST(ReceivedPower, GoldenAndDistanceLaw) {
    const double k = coupling_constant(kCoil, kCoil, ChannelParams{});
    EXPECT_LT(rel_err(received_power(k, 5.0, PathLossExponent::Sixth), 2.829812973880341e-12), 1e-14);
    const double r = received_power(k, 1.5, PathLossExponent::Sixth) / received_power(k, 3.0, PathLossExponent::Sixth);
    EXPECT_LT(rel_err(r, 64.0), 1e-13);
    const double c = received_power(k, 1.5, PathLossExponent::Cubic) / received_power(k, 3.0, PathLossExponent::Cubic);
    EXPECT_LT(rel_err(c, 8.0), 1e-13);
}

TEST(ReceivedPower, CoincidentThrows) {
    EXPECT_THROW(received_power(1.0, 0.0, PathLossExponent::Sixth), std::domain_error);
    EXPECT_THROW(received_power(1.0, 5e-7, PathLossExponent::Sixth), std::domain_error);
}

TEST(Gradient, MatchesCentralDifferences) {
    Rng rng(2024);
    for (auto e : {PathLossExponent::Sixth, PathLossExponent::Cubic}) {
        for (int trial = 0; trial < 100; ++trial) {
            const Vec3 si(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5));
            Vec3 sj(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5));
            if ((si - sj).norm() < 0.5) sj += Vec3(1.0, 1.0, 1.0);
            const double k = rng.uniform(0.5, 2.0);
            const Vec3 g = mean_power_gradient(k, si, sj, e);
            const double h = 1e-4 * (si - sj).norm();
            Vec3 fd;
            for (int a = 0; a < 3; ++a) {
                Vec3 p = si, m = si;
                p[a] += h;
                m[a] -= h;
                // fourth-order stencil so truncation stays well under 1e-6
                Vec3 p2 = si, m2 = si;
                p2[a] += 2 * h;
                m2[a] -= 2 * h;
                const auto mu = [&](const Vec3& s) { return received_power(k, (s - sj).norm(), e); };
                fd[a] = (-mu(p2) + 8 * mu(p) - 8 * mu(m) + mu(m2)) / (12 * h);
            }
            EXPECT_LT((g - fd).norm() / g.norm(), 1e-6) << "trial " << trial;
        }
    }
}

TEST(Gradient, SymmetryAndOddness) {
    const Vec3 a(1.0, 2.0, -0.5), b(-0.3, 0.4, 1.1);
    const Vec3 gab = mean_power_gradient(2.0, a, b, PathLossExponent::Sixth);
    const Vec3 gba = mean_power_gradient(2.0, b, a, PathLossExponent::Sixth);
    EXPECT_LT((gab + gba).norm(), 1e-15 * gab.norm());
    EXPECT_LT(rel_err(gab.norm(), power_distance_slope(2.0, (a - b).norm(), PathLossExponent::Sixth)), 1e-13);
}

TEST(Hessian, MatchesGradientDifferences) {
    const Vec3 si(0.7, -1.2, 0.4), sj(-0.5, 0.3, -0.2);
    for (auto e : {PathLossExponent::Sixth, PathLossExponent::Cubic}) {
        const Eigen::Matrix3d h = mean_power_hessian(1.3, si, sj, e);
        const double step = 1e-6;
        for (int a = 0; a < 3; ++a) {
            Vec3 p = si, m = si;
            p[a] += step;
            m[a] -= step;
            const Vec3 col = (mean_power_gradient(1.3, p, sj, e) - mean_power_gradient(1.3, m, sj, e)) / (2 * step);
            EXPECT_LT((col - h.col(a)).norm(), 1e-6 * h.norm());
        }
        EXPECT_LT((h - h.transpose()).norm(), 1e-15 * h.norm());
    }
}

TEST(Sampling, MeanAndSpread) {
    Rng rng(7);
    const double k = 1.0, d = 1.2, sigma = 0.01;
    const double mu = received_power(k, d, PathLossExponent::Sixth);
    const int n = 1000000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = sample_measurement(k, d, NoiseSpec{sigma}, PathLossExponent::Sixth, rng);
        sum += v;
        sq += (v - mu) * (v - mu);
    }
    EXPECT_LT(std::abs(sum / n - mu), 5.0 * sigma / std::sqrt(n));
    EXPECT_LT(rel_err(std::sqrt(sq / n), sigma), 5e-3);
}

TEST(Sampling, Deterministic) {
    Rng a(99), b(99);
    for (int i = 0; i < 1000; ++i) {
        EXPECT_EQ(sample_measurement(1.0, 2.0, NoiseSpec{0.1}, PathLossExponent::Sixth, a),
                  sample_measurement(1.0, 2.0, NoiseSpec{0.1}, PathLossExponent::Sixth, b));
    }
}

class LogLikelihood : public ::testing::Test {
protected:
    MeasurementGraph graph = micrlb::testing::star_graph(2, 1, 1.0, 0.1);
    Positions pos{{0, 0, 0}, {2, 0, 0}, {1, 0.5, 0}};
};

TEST_F(LogLikelihood, ZeroResidual) {
    std::vector<Measurement> m;
    for (std::size_t e = 0; e < graph.edges().size(); ++e) {
        const auto& ed = graph.edges()[e];
        m.push_back({e, received_power(1.0, (pos[ed.a] - pos[ed.b]).norm(), PathLossExponent::Sixth)});
    }
    const double expected = 2.0 * (-std::log(0.1) - 0.5 * std::log(2.0 * kPi));
    EXPECT_LT(rel_err(log_likelihood(m, pos, graph), expected), 1e-14);
}

TEST_F(LogLikelihood, MatchesDirectSumAndIsAdditive) {
    const std::vector<Measurement> m{{0, 0.5}, {1, 0.3}};
    double direct = 0.0;
    for (const auto& x : m) {
        const auto& ed = graph.edges()[x.edge];
        const double mu = std::pow((pos[ed.a] - pos[ed.b]).norm(), -6.0);
        direct += -std::log(0.1 * std::sqrt(2.0 * kPi)) - (x.value - mu) * (x.value - mu) / (2.0 * 0.01);
    }
    const double whole = log_likelihood(m, pos, graph);
    EXPECT_LT(rel_err(whole, direct), 1e-13);
    const double parts = log_likelihood(std::span(m).first(1), pos, graph) + log_likelihood(std::span(m).last(1), pos, graph);
    EXPECT_LT(rel_err(whole, parts), 1e-14);
}

TEST_F(LogLikelihood, MaximizedAtTruthAlongSlice) {
    std::vector<Measurement> m;
    for (std::size_t e = 0; e < graph.edges().size(); ++e) {
        const auto& ed = graph.edges()[e];
        m.push_back({e, received_power(1.0, (pos[ed.a] - pos[ed.b]).norm(), PathLossExponent::Sixth)});
    }
    const double at_truth = log_likelihood(m, pos, graph);
    for (double dy : {-0.2, -0.05, -0.01, 0.01, 0.05, 0.2}) {
        Positions p = pos;
        p[2].y() += dy;
        EXPECT_LT(log_likelihood(m, p, graph), at_truth);
    }
}
