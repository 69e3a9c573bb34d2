#include "micrlb/estimator.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace micrlb {

namespace {

constexpr double kMaxDamping = 1e20;

class Problem {
public:
    Problem(const MeasurementGraph& graph, std::span<const Measurement> measurements, Positions base,
            SearchBox box)
        : graph_(graph), meas_(measurements), base_(std::move(base)), box_(box) {
        n_ = graph.unknown_count();
        for (const auto& m : meas_) {
            if (m.edge >= graph.edges().size()) throw std::out_of_range("measurement references unknown edge");
        }
    }

    Eigen::Index dim() const { return static_cast<Eigen::Index>(3 * n_); }

    Eigen::VectorXd normalize(const Positions& nodes) const {
        Eigen::VectorXd u(dim());
        for (std::size_t t = 0; t < n_; ++t) {
            const Vec3& p = nodes[static_cast<std::size_t>(graph_.node_of_unknown(t))];
            u.segment<3>(static_cast<Eigen::Index>(3 * t)) =
                (p - box_.center).cwiseQuotient(box_.half_extent);
        }
        return u;
    }

    Positions nodes(const Eigen::VectorXd& u) const {
        Positions out = base_;
        for (std::size_t t = 0; t < n_; ++t) {
            out[static_cast<std::size_t>(graph_.node_of_unknown(t))] =
                box_.center + box_.half_extent.cwiseProduct(u.segment<3>(static_cast<Eigen::Index>(3 * t)));
        }
        return out;
    }

    Positions things(const Eigen::VectorXd& u) const {
        Positions out(n_);
        for (std::size_t t = 0; t < n_; ++t) {
            out[t] = box_.center + box_.half_extent.cwiseProduct(u.segment<3>(static_cast<Eigen::Index>(3 * t)));
        }
        return out;
    }

    // Residuals and (optionally) the Jacobian in normalized coordinates.
    // Returns false when a link degenerates.
    bool evaluate(const Eigen::VectorXd& u, Eigen::VectorXd& r, Eigen::MatrixXd* jac) const {
        const Positions pos = nodes(u);
        const auto m = static_cast<Eigen::Index>(meas_.size());
        r.resize(m);
        if (jac) jac->setZero(m, dim());
        for (Eigen::Index i = 0; i < m; ++i) {
            const Edge& e = graph_.edges()[meas_[static_cast<std::size_t>(i)].edge];
            const Vec3& sa = pos[static_cast<std::size_t>(e.a)];
            const Vec3& sb = pos[static_cast<std::size_t>(e.b)];
            const double d = (sa - sb).norm();
            if (!(d >= kCoincidentDistance)) return false;
            r(i) = (meas_[static_cast<std::size_t>(i)].value - received_power(e.k, d, graph_.exponent())) / e.sigma;
            if (jac) {
                const Vec3 g = mean_power_gradient(e.k, sa, sb, graph_.exponent()) / e.sigma;
                const int ua = graph_.unknown_index(e.a);
                const int ub = graph_.unknown_index(e.b);
                if (ua >= 0) {
                    jac->block<1, 3>(i, 3 * ua) -= g.cwiseProduct(box_.half_extent).transpose();
                }
                if (ub >= 0) {
                    jac->block<1, 3>(i, 3 * ub) += g.cwiseProduct(box_.half_extent).transpose();
                }
            }
        }
        return r.allFinite();
    }

    double meters(const Eigen::VectorXd& du) const {
        double sq = 0.0;
        for (std::size_t t = 0; t < n_; ++t) {
            sq += du.segment<3>(static_cast<Eigen::Index>(3 * t)).cwiseProduct(box_.half_extent).squaredNorm();
        }
        return std::sqrt(sq);
    }

private:
    const MeasurementGraph& graph_;
    std::span<const Measurement> meas_;
    Positions base_;
    SearchBox box_;
    std::size_t n_ = 0;
};

SearchBox bounding_box(const Positions& pts) {
    Vec3 lo = pts.front();
    Vec3 hi = pts.front();
    for (const auto& p : pts) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    SearchBox box;
    box.center = 0.5 * (lo + hi);
    box.half_extent = (0.5 * (hi - lo)).cwiseMax(1.0);
    return box;
}

}  // namespace

EstimateResult mle_localize(const MeasurementGraph& graph, std::span<const Measurement> measurements,
                            const Positions& initial, const EstimatorOptions& options) {
    if (initial.size() < graph.node_count()) throw std::invalid_argument("initial positions do not cover the graph");
    const SearchBox box = options.box ? *options.box : bounding_box(initial);
    if (!(box.half_extent.array() > 0.0).all()) throw std::invalid_argument("search box must have positive extent");
    const Problem problem(graph, measurements, initial, box);

    Eigen::VectorXd u = problem.normalize(initial);
    Eigen::VectorXd r;
    Eigen::MatrixXd jac;
    if (!problem.evaluate(u, r, &jac)) {
        throw DivergenceError("objective is not finite at the initial point", problem.things(u));
    }
    double objective = 0.5 * r.squaredNorm();
    Eigen::VectorXd grad = jac.transpose() * r;
    const double grad0 = grad.norm();

    EstimateResult result;
    result.gradient_tolerance = options.gradient_rel_tol * grad0;
    double damping = options.initial_damping;
    Eigen::VectorXd r_trial;
    // Set when no step can lower the objective any further: either every
    // damping level failed or the accepted step is below step_tol.
    bool stationary = false;

    while (grad.norm() > result.gradient_tolerance && result.iterations < options.max_iterations) {
        const Eigen::MatrixXd normal = jac.transpose() * jac;
        const Eigen::VectorXd diag = normal.diagonal().cwiseMax(1e-300);
        bool accepted = false;
        double step_m = 0.0;
        while (damping < kMaxDamping) {
            Eigen::MatrixXd lhs = normal;
            lhs.diagonal() += damping * diag;
            const Eigen::VectorXd du = lhs.ldlt().solve(-grad);
            step_m = problem.meters(du);
            const Eigen::VectorXd trial = u + du;
            if (du.allFinite() && problem.evaluate(trial, r_trial, nullptr)) {
                const double trial_obj = 0.5 * r_trial.squaredNorm();
                if (trial_obj <= objective) {
                    u = trial;
                    objective = trial_obj;
                    damping = std::max(damping / 3.0, 1e-12);
                    accepted = true;
                    break;
                }
            }
            damping *= 4.0;
        }
        if (!accepted) {
            stationary = true;
            break;
        }
        ++result.iterations;
        problem.evaluate(u, r, &jac);
        grad = jac.transpose() * r;
        if (step_m < options.step_tol) {
            stationary = true;
            break;
        }
    }

    if (!std::isfinite(objective)) throw DivergenceError("objective became non-finite", problem.things(u));
    result.positions = problem.things(u);
    result.final_objective = objective;
    result.gradient_norm = grad.norm();
    result.converged = stationary || result.gradient_norm <= result.gradient_tolerance;
    if (options.truth) {
        const auto& truth = *options.truth;
        if (truth.size() != result.positions.size()) throw std::invalid_argument("truth size mismatch");
        for (std::size_t i = 0; i < truth.size(); ++i) {
            result.per_node_error.push_back((result.positions[i] - truth[i]).norm());
        }
    }
    return result;
}

EstimateResult multi_start(const MeasurementGraph& graph, std::span<const Measurement> measurements,
                           const Positions& anchors_and_placeholders, int n_starts, std::uint64_t seed,
                           const EstimatorOptions& options) {
    if (n_starts < 1) throw std::invalid_argument("n_starts must be >= 1");
    if (!options.box) throw std::invalid_argument("multi_start needs a search box");
    const SearchBox& box = *options.box;

    std::optional<EstimateResult> best;
    bool best_converged = false;
    Positions last_iterate;
    for (int s = 0; s < n_starts; ++s) {
        Positions init = anchors_and_placeholders;
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(s)));
        for (std::size_t t = 0; t < graph.unknown_count(); ++t) {
            Vec3 p = box.center;
            if (s > 0) {
                for (int a = 0; a < 3; ++a) p(a) += box.half_extent(a) * rng.uniform(-1.0, 1.0);
            }
            init[static_cast<std::size_t>(graph.node_of_unknown(t))] = p;
        }
        try {
            EstimateResult res = mle_localize(graph, measurements, init, options);
            const bool better = !best || (res.converged && !best_converged) ||
                                (res.converged == best_converged && res.final_objective < best->final_objective);
            if (better) {
                best_converged = res.converged;
                best = std::move(res);
            }
        } catch (const DivergenceError& e) {
            last_iterate = e.last_iterate();
        }
    }
    if (!best) throw DivergenceError("all starts diverged", last_iterate);
    return *best;
}

double rmse(const Positions& estimates, const Positions& truth) {
    if (estimates.size() != truth.size() || truth.empty()) throw std::invalid_argument("rmse needs matching non-empty inputs");
    double sq = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) sq += (estimates[i] - truth[i]).squaredNorm();
    return std::sqrt(sq / static_cast<double>(truth.size()));
}

}  // namespace micrlb
