#include "micrlb/fim.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

using namespace micrlb;
using micrlb::testing::rel_err;
using micrlb::testing::star_graph;
using micrlb::testing::tetra_scene;

namespace {
double min_eig(const Eigen::MatrixXd& m) {
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues()(0);
}
}  // namespace

TEST(FimStandard, NoEdgesGivesZero) {
    MeasurementGraph g({NodeKind::Anchor, NodeKind::Thing, NodeKind::Thing}, PathLossExponent::Sixth);
    const Positions p{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    const FimMatrix f = fim_standard(g, p);
    ASSERT_EQ(f.entries.rows(), 6);
    EXPECT_EQ(f.entries.norm(), 0.0);
}

TEST(FimStandard, SingleLinkIsRankOneAlongLink) {
    const MeasurementGraph g = star_graph(1, 1, 1.0, 1.0);
    const Positions p{{0, 0, 0}, {1, 0, 0}};
    const FimMatrix f = fim_standard(g, p);
    // gradient -6 k d^-7 along x
    EXPECT_DOUBLE_EQ(f.entries(0, 0), 36.0);
    EXPECT_EQ(f.entries(1, 1), 0.0);
    EXPECT_EQ(f.entries(2, 2), 0.0);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(f.entries);
    EXPECT_EQ(lu.rank(), 1);
}

TEST(FimStandard, SymmetricPsdAndLayout) {
    const MeasurementGraph g = star_graph(4, 3, 1.0, 0.01, true);
    const Positions p = tetra_scene(3);
    const FimMatrix f = fim_standard(g, p);
    EXPECT_LT((f.entries - f.entries.transpose()).norm(), 1e-15 * f.entries.norm());
    EXPECT_GT(min_eig(f.entries), -1e-12 * f.entries.norm());
    // axis-major index vs node-major view
    const Eigen::MatrixXd nm = f.node_major();
    for (std::size_t i = 0; i < 3; ++i) {
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                EXPECT_EQ(nm(3 * i + a, 3 * i + b), f.entries(f.index(Axis(a), i), f.index(Axis(b), i)));
                EXPECT_EQ(f.node_block(i, i)(a, b), nm(3 * i + a, 3 * i + b));
            }
        }
    }
}

TEST(FimStandard, AnchorOnlyHasNoCrossBlocks) {
    const MeasurementGraph g = star_graph(4, 3, 1.0, 0.01, false);
    const FimMatrix f = fim_standard(g, tetra_scene(3));
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t l = 0; l < 3; ++l) {
            if (i != l) EXPECT_EQ(f.node_block(i, l).norm(), 0.0);
        }
    }
}

TEST(FimStandard, ScalingLaws) {
    const MeasurementGraph g = star_graph(4, 2, 1.0, 0.01, true);
    const Positions p = tetra_scene(2);
    const Eigen::MatrixXd base = fim_standard(g, p).entries;
    const Eigen::MatrixXd k3 = fim_standard(g.with_scaled_k(3.0), p).entries;
    const Eigen::MatrixXd s2 = fim_standard(g.with_scaled_sigma(2.0), p).entries;
    EXPECT_LT((k3 - 9.0 * base).norm() / k3.norm(), 1e-14);
    EXPECT_LT((s2 - 0.25 * base).norm() / base.norm(), 1e-14);
}

TEST(FimStandard, AddingLinksAddsInformation) {
    const Positions p = tetra_scene(2);
    const Eigen::MatrixXd without = fim_standard(star_graph(4, 2, 1.0, 0.01, false), p).entries;
    const Eigen::MatrixXd with = fim_standard(star_graph(4, 2, 1.0, 0.01, true), p).entries;
    EXPECT_GT(min_eig(with - without), -1e-12 * with.norm());
    EXPECT_GT((with - without).norm(), 0.0);
}

TEST(FimOracle, MonteCarloMatchesAnalytic) {
    const MeasurementGraph g = star_graph(4, 2, 1.0, 0.01, true);
    const Positions p = tetra_scene(2);
    const FimMatrix exact = fim_standard(g, p);
    const FimMatrix mc = fim_oracle_mc(g, p, 200000, 17);
    ASSERT_TRUE(mc.standard_error.has_value());
    EXPECT_LT((mc.entries - exact.entries).norm() / exact.entries.norm(), 0.02);
    EXPECT_LT((mc.entries - mc.entries.transpose()).norm(), 1e-12 * mc.entries.norm());
}

TEST(FimOracle, FiniteDifferenceMatchesAnalytic) {
    const MeasurementGraph g = star_graph(4, 2, 1.0, 0.01, true);
    const Positions p = tetra_scene(2);
    const FimMatrix exact = fim_standard(g, p);
    const FimMatrix fd = fim_oracle_fd(g, p, 20000, 1e-5 * scene_diameter(p), 5);
    ASSERT_TRUE(fd.standard_error.has_value());
    const double scale = exact.entries.norm();
    for (Eigen::Index r = 0; r < fd.entries.rows(); ++r) {
        for (Eigen::Index c = 0; c < fd.entries.cols(); ++c) {
            EXPECT_LE(std::abs(fd.entries(r, c) - exact.entries(r, c)),
                      4.0 * (*fd.standard_error)(r, c) + 1e-6 * scale)
                << r << "," << c;
        }
    }
}

TEST(FimOracle, RejectsBadArguments) {
    const MeasurementGraph g = star_graph(4, 1, 1.0, 0.01);
    const Positions p = tetra_scene(1);
    EXPECT_THROW(fim_oracle_mc(g, p, 999, 1), std::invalid_argument);
    EXPECT_THROW(fim_oracle_fd(g, p, 1000, 1.0, 1), std::invalid_argument);
    EXPECT_THROW(fim_oracle_fd(g, p, 1000, 1e-12, 1), std::invalid_argument);
}

TEST(FimOracle, SeedDeterminism) {
    const MeasurementGraph g = star_graph(4, 1, 1.0, 0.01);
    const Positions p = tetra_scene(1);
    EXPECT_EQ(fim_oracle_mc(g, p, 5000, 3).entries, fim_oracle_mc(g, p, 5000, 3).entries);
    EXPECT_NE(fim_oracle_mc(g, p, 5000, 3).entries, fim_oracle_mc(g, p, 5000, 4).entries);
}

// Hand-evaluated values of the printed element expressions.
TEST(FimPrinted, GoldenBlocks) {
    const Eigen::Matrix3d a = paper_link_block(1.0, 1.0, {1, 0, 0}, {0, 0, 0});
    EXPECT_DOUBLE_EQ(a(0, 0), -99.0);
    EXPECT_DOUBLE_EQ(a(1, 1), 9.0);
    EXPECT_DOUBLE_EQ(a(2, 2), 9.0);
    EXPECT_EQ(a(0, 1), 0.0);

    const Eigen::Matrix3d b = paper_link_block(2.0, 0.5, {1, 2, 2}, {0, 0, 0});
    EXPECT_LT(rel_err(b(0, 0), -2032.0 / 2187.0), 1e-12);
    EXPECT_LT(rel_err(b(0, 1), 640.0 / 2187.0), 1e-12);

    const Eigen::Matrix3d c = paper_link_block(1.5, 2.0, {0.5, -1, 2}, {-0.5, 0, 1});
    for (int i = 0; i < 3; ++i) EXPECT_LT(rel_err(c(i, i), -1.052430427049904267), 1e-12);
    EXPECT_LT(rel_err(c(0, 1), -5.0 / 12.0), 1e-12);
    EXPECT_LT(rel_err(c(0, 2), 5.0 / 12.0), 1e-12);
    EXPECT_LT(rel_err(c(1, 2), -5.0 / 12.0), 1e-12);
}

TEST(FimPrinted, BlockSymmetries) {
    const Vec3 si(0.3, -1.1, 0.8), sj(-0.4, 0.2, 0.1);
    const Eigen::Matrix3d ij = paper_link_block(1.0, 1.0, si, sj);
    EXPECT_LT((ij - ij.transpose()).norm(), 1e-15 * ij.norm());
    EXPECT_LT((ij - paper_link_block(1.0, 1.0, sj, si)).norm(), 1e-15 * ij.norm());
}

TEST(FimPrinted, PeerLinksFillCrossBlocks) {
    MeasurementGraph g({NodeKind::Thing, NodeKind::Thing}, PathLossExponent::Sixth);
    g.add_edge({0, 1, LinkKind::PeerLink, 1.0, 1.0});
    const Positions p{{1, 0, 0}, {0, 0, 0}};
    const FimMatrix f = fim_paper(g, p);
    const Eigen::Matrix3d blk = paper_link_block(1.0, 1.0, p[0], p[1]);
    EXPECT_EQ(f.node_block(0, 0), blk);
    EXPECT_EQ(f.node_block(1, 1), blk);
    EXPECT_EQ(f.node_block(0, 1), -blk);
}

TEST(FimPrinted, IndependentOfExponent) {
    const Positions p = tetra_scene(2);
    EXPECT_EQ(fim_paper(star_graph(4, 2, 1.0, 0.1, true, PathLossExponent::Sixth), p).entries,
              fim_paper(star_graph(4, 2, 1.0, 0.1, true, PathLossExponent::Cubic), p).entries);
}

TEST(FimMode, Names) {
    EXPECT_EQ(fim_mode_from_string("oracle-mc"), FimMode::OracleMc);
    EXPECT_EQ(fim_mode_from_string("oracle_fd"), FimMode::OracleFd);
    EXPECT_EQ(to_string(FimMode::Paper), "paper");
    EXPECT_THROW(fim_mode_from_string("bogus"), std::invalid_argument);
}
