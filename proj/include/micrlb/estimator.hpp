#pragma once

#include "micrlb/channel.hpp"
#include "micrlb/deployment.hpp"

#include <cstdint>
#include <optional>
#include <span>

namespace micrlb {

/// Axis-aligned region used to normalize coordinates and to draw multi-start
/// initializations.
struct SearchBox {
    Vec3 center = Vec3::Zero();
    Vec3 half_extent = Vec3::Ones();
};

struct EstimatorOptions {
    int max_iterations = 500;
    double gradient_rel_tol = 1e-10;  // relative to the initial gradient norm
    double step_tol = 1e-12;          // m
    double initial_damping = 1e-3;
    std::optional<SearchBox> box;      // defaults to the bounding box of the inputs
    std::optional<Positions> truth;    // thing positions, fills per_node_error
};

struct EstimateResult {
    Positions positions;  // one per thing, in unknown order
    double final_objective = 0.0;  // 0.5 * sum ((P - mu) / sigma)^2
    int iterations = 0;
    bool converged = false;  // gradient below tolerance, or no step lowers the objective
    double gradient_norm = 0.0;
    double gradient_tolerance = 0.0;
    std::vector<double> per_node_error;  // m, when truth was supplied
};

/// Damped Gauss-Newton (Levenberg-Marquardt) on the whitened residuals
/// (P - mu) / sigma, in box-normalized coordinates. `initial` is indexed by
/// node id; anchor entries are taken as known. Accepted steps never increase
/// the objective. Throws DivergenceError if the objective becomes non-finite
/// at the starting point.
EstimateResult mle_localize(const MeasurementGraph& graph, std::span<const Measurement> measurements,
                            const Positions& initial, const EstimatorOptions& options = {});

/// Start 0 is the box center; starts 1..n_starts-1 are uniform in the box,
/// drawn from derive_seed(seed, start). Returns the lowest-objective converged
/// result (lowest start index on ties), else the lowest finite objective.
/// Throws DivergenceError when every start diverges.
EstimateResult multi_start(const MeasurementGraph& graph, std::span<const Measurement> measurements,
                           const Positions& anchors_and_placeholders, int n_starts, std::uint64_t seed,
                           const EstimatorOptions& options);

/// sqrt(mean over nodes of squared Euclidean error).
double rmse(const Positions& estimates, const Positions& truth);

}  // namespace micrlb
