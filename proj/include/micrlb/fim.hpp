#pragma once

// Fisher information for the unknown thing coordinates. Unknowns are ordered
// axis-major: all x, then all y, then all z, thing-major within each axis, so
// the matrix reads as the 3x3 grid of N x N blocks I_xx, I_xy, ... .

#include "micrlb/channel.hpp"
#include "micrlb/deployment.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>

namespace micrlb {

enum class FimMode { Standard, Paper, OracleMc, OracleFd };

std::string to_string(FimMode m);
/// Accepts standard | paper | oracle-mc | oracle-fd (underscores allowed).
FimMode fim_mode_from_string(const std::string& s);

enum class Axis : int { X = 0, Y = 1, Z = 2 };

struct FimMatrix {
    Eigen::MatrixXd entries;
    FimMode mode = FimMode::Standard;
    /// Per-entry standard error for the sampled oracles.
    std::optional<Eigen::MatrixXd> standard_error;

    std::size_t things() const { return static_cast<std::size_t>(entries.rows()) / 3; }
    Eigen::Index index(Axis axis, std::size_t thing) const {
        return static_cast<Eigen::Index>(static_cast<std::size_t>(axis) * things() + thing);
    }
    /// N x N block I_{row,col}.
    Eigen::MatrixXd axis_block(Axis row, Axis col) const;
    /// Node-major view: 3x3 block coupling thing i to thing l.
    Eigen::Matrix3d node_block(std::size_t i, std::size_t l) const;
    /// Same matrix reordered node-major (x0 y0 z0 x1 ...).
    Eigen::MatrixXd node_major() const;
};

/// sum over edges of g g^T / sigma^2, g the mean-power gradient w.r.t. the
/// unknown coordinates.
FimMatrix fim_standard(const MeasurementGraph& graph, const Positions& positions);

/// Closed-form element expressions transcribed as printed, with E(P) = P,
/// accumulated per edge: the link block goes into each unknown endpoint's own
/// 3x3 block and its negation into the cross-node blocks of peer links.
/// Independent of the path-loss exponent.
FimMatrix fim_paper(const MeasurementGraph& graph, const Positions& positions);

/// The per-link 3x3 block the printed expressions give for one endpoint.
Eigen::Matrix3d paper_link_block(double k, double sigma, const Vec3& s_i, const Vec3& s_j);

/// E[score score^T] by sampling measurements and accumulating outer products
/// of the analytic score. Samples are processed in fixed-size batches with
/// per-batch RNG streams so results do not depend on the thread count.
FimMatrix fim_oracle_mc(const MeasurementGraph& graph, const Positions& positions,
                        std::size_t n_samples, std::uint64_t seed);

/// E[-Hessian of the log-likelihood], Hessian by central second differences
/// of log_likelihood with the given step (meters).
FimMatrix fim_oracle_fd(const MeasurementGraph& graph, const Positions& positions,
                        std::size_t n_samples, double step, std::uint64_t seed);

/// Largest pairwise distance among the graph's nodes.
double scene_diameter(const Positions& positions);

/// One noisy measurement per edge at the given (true) positions.
std::vector<Measurement> sample_measurements(const MeasurementGraph& graph,
                                             const Positions& positions, Rng& rng);

/// Mean power per edge at the given positions.
std::vector<double> mean_powers(const MeasurementGraph& graph, const Positions& positions);

inline constexpr std::size_t kOracleBatchSize = 4096;
inline constexpr std::size_t kOracleMinSamples = 1000;

}  // namespace micrlb
