#include "micrlb/fim.hpp"

#include "micrlb/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace micrlb {

namespace {

constexpr std::size_t kOracleChunks = 64;
constexpr std::uint64_t kMcStream = 0;
constexpr std::uint64_t kFdStream = 1;

void add_node_block(Eigen::MatrixXd& m, std::size_t n, int i, int l, const Eigen::Matrix3d& block) {
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            m(static_cast<Eigen::Index>(r * n + static_cast<std::size_t>(i)),
              static_cast<Eigen::Index>(c * n + static_cast<std::size_t>(l))) += block(r, c);
        }
    }
}

void symmetrize(Eigen::MatrixXd& m) {
    const Eigen::MatrixXd t = m.transpose();
    m = 0.5 * (m + t);
}

void check_positions(const MeasurementGraph& graph, const Positions& positions) {
    if (positions.size() < graph.node_count()) {
        throw std::invalid_argument("positions do not cover every graph node");
    }
}

struct LinkTerm {
    int ua = -1;
    int ub = -1;
    Vec3 gradient;  // d mu / d s_a
    double mean = 0.0;
    double sigma = 0.0;
};

std::vector<LinkTerm> link_terms(const MeasurementGraph& graph, const Positions& positions) {
    std::vector<LinkTerm> terms;
    terms.reserve(graph.edges().size());
    for (const auto& e : graph.edges()) {
        const Vec3& sa = positions[static_cast<std::size_t>(e.a)];
        const Vec3& sb = positions[static_cast<std::size_t>(e.b)];
        LinkTerm t;
        t.ua = graph.unknown_index(e.a);
        t.ub = graph.unknown_index(e.b);
        t.gradient = mean_power_gradient(e.k, sa, sb, graph.exponent());
        t.mean = received_power(e.k, (sa - sb).norm(), graph.exponent());
        t.sigma = e.sigma;
        terms.push_back(t);
    }
    return terms;
}

// Splits [0, n_samples) into fixed batches, groups batches into a fixed number
// of chunks, runs chunk(c, first_batch, last_batch) in parallel and returns the
// per-chunk results in chunk order.
template <typename Acc, typename Fn>
std::vector<Acc> run_chunks(std::size_t n_samples, Fn&& chunk) {
    const std::size_t batches = (n_samples + kOracleBatchSize - 1) / kOracleBatchSize;
    const std::size_t chunks = std::min(kOracleChunks, batches);
    std::vector<Acc> results(chunks);
    parallel_for(chunks, [&](std::size_t c) {
        const std::size_t first = c * batches / chunks;
        const std::size_t last = (c + 1) * batches / chunks;
        results[c] = chunk(first, last);
    });
    return results;
}

std::size_t batch_samples(std::size_t batch, std::size_t n_samples) {
    const std::size_t begin = batch * kOracleBatchSize;
    return std::min(kOracleBatchSize, n_samples - begin);
}

struct MomentSums {
    Eigen::MatrixXd sum;
    Eigen::MatrixXd sum_sq;
};

FimMatrix finish_moments(const std::vector<MomentSums>& parts, std::size_t dim, std::size_t n,
                         FimMode mode) {
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    Eigen::MatrixXd sum_sq = sum;
    for (const auto& p : parts) {
        sum += p.sum;
        sum_sq += p.sum_sq;
    }
    const double nn = static_cast<double>(n);
    FimMatrix fim;
    fim.mode = mode;
    fim.entries = sum / nn;
    const Eigen::MatrixXd var =
        ((sum_sq / nn - fim.entries.cwiseProduct(fim.entries)) * (nn / (nn - 1.0))).cwiseMax(0.0);
    fim.standard_error = (var / nn).cwiseSqrt();
    symmetrize(fim.entries);
    symmetrize(*fim.standard_error);
    return fim;
}

}  // namespace

std::string to_string(FimMode m) {
    switch (m) {
        case FimMode::Standard: return "standard";
        case FimMode::Paper: return "paper";
        case FimMode::OracleMc: return "oracle-mc";
        case FimMode::OracleFd: return "oracle-fd";
    }
    return "?";
}

FimMode fim_mode_from_string(const std::string& s) {
    if (s == "standard") return FimMode::Standard;
    if (s == "paper") return FimMode::Paper;
    if (s == "oracle-mc" || s == "oracle_mc") return FimMode::OracleMc;
    if (s == "oracle-fd" || s == "oracle_fd") return FimMode::OracleFd;
    throw std::invalid_argument("unknown FIM mode '" + s + "' (standard|paper|oracle-mc|oracle-fd)");
}

Eigen::MatrixXd FimMatrix::axis_block(Axis row, Axis col) const {
    const auto n = static_cast<Eigen::Index>(things());
    return entries.block(static_cast<int>(row) * n, static_cast<int>(col) * n, n, n);
}

Eigen::Matrix3d FimMatrix::node_block(std::size_t i, std::size_t l) const {
    Eigen::Matrix3d b;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            b(r, c) = entries(index(static_cast<Axis>(r), i), index(static_cast<Axis>(c), l));
        }
    }
    return b;
}

Eigen::MatrixXd FimMatrix::node_major() const {
    const std::size_t n = things();
    Eigen::MatrixXd out(entries.rows(), entries.cols());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t l = 0; l < n; ++l) {
            out.block<3, 3>(static_cast<Eigen::Index>(3 * i), static_cast<Eigen::Index>(3 * l)) = node_block(i, l);
        }
    }
    return out;
}

FimMatrix fim_standard(const MeasurementGraph& graph, const Positions& positions) {
    check_positions(graph, positions);
    const std::size_t n = graph.unknown_count();
    FimMatrix fim;
    fim.mode = FimMode::Standard;
    fim.entries = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(3 * n), static_cast<Eigen::Index>(3 * n));
    for (const auto& t : link_terms(graph, positions)) {
        const Eigen::Matrix3d outer = t.gradient * t.gradient.transpose() / (t.sigma * t.sigma);
        if (t.ua >= 0) add_node_block(fim.entries, n, t.ua, t.ua, outer);
        if (t.ub >= 0) add_node_block(fim.entries, n, t.ub, t.ub, outer);
        if (t.ua >= 0 && t.ub >= 0) {
            add_node_block(fim.entries, n, t.ua, t.ub, -outer);
            add_node_block(fim.entries, n, t.ub, t.ua, -outer);
        }
    }
    symmetrize(fim.entries);
    return fim;
}

Eigen::Matrix3d paper_link_block(double k, double sigma, const Vec3& s_i, const Vec3& s_j) {
    const Vec3 diff = s_i - s_j;
    const double d = diff.norm();
    if (!(d >= kCoincidentDistance)) throw std::domain_error("coincident link endpoints");
    const double s2 = sigma * sigma;
    const double d5 = std::pow(d, 5);
    const double d7 = std::pow(d, 7);
    const double d8 = std::pow(d, 8);
    Eigen::Matrix3d b;
    for (int r = 0; r < 3; ++r) {
        const double q = diff(r) * diff(r);
        b(r, r) = 3.0 * k / s2 * (2.0 * k / d7 - 28.0 * k * q / d8 + k / d7 - 8.0 * q / d5);
        for (int c = r + 1; c < 3; ++c) {
            b(r, c) = 60.0 * k * k * diff(r) * diff(c) / (s2 * d8);
            b(c, r) = b(r, c);
        }
    }
    return b;
}

FimMatrix fim_paper(const MeasurementGraph& graph, const Positions& positions) {
    check_positions(graph, positions);
    const std::size_t n = graph.unknown_count();
    FimMatrix fim;
    fim.mode = FimMode::Paper;
    fim.entries = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(3 * n), static_cast<Eigen::Index>(3 * n));
    for (const auto& e : graph.edges()) {
        const Vec3& sa = positions[static_cast<std::size_t>(e.a)];
        const Vec3& sb = positions[static_cast<std::size_t>(e.b)];
        const int ua = graph.unknown_index(e.a);
        const int ub = graph.unknown_index(e.b);
        const Eigen::Matrix3d block = paper_link_block(e.k, e.sigma, sa, sb);
        if (ua >= 0) add_node_block(fim.entries, n, ua, ua, block);
        if (ub >= 0) add_node_block(fim.entries, n, ub, ub, block);
        if (ua >= 0 && ub >= 0) {
            add_node_block(fim.entries, n, ua, ub, -block);
            add_node_block(fim.entries, n, ub, ua, -block);
        }
    }
    symmetrize(fim.entries);
    return fim;
}

FimMatrix fim_oracle_mc(const MeasurementGraph& graph, const Positions& positions,
                        std::size_t n_samples, std::uint64_t seed) {
    check_positions(graph, positions);
    if (n_samples < kOracleMinSamples) throw std::invalid_argument("oracle needs at least 1000 samples");
    const std::size_t n = graph.unknown_count();
    const auto dim = static_cast<Eigen::Index>(3 * n);
    const auto terms = link_terms(graph, positions);

    auto parts = run_chunks<MomentSums>(n_samples, [&](std::size_t first, std::size_t last) {
        MomentSums acc{Eigen::MatrixXd::Zero(dim, dim), Eigen::MatrixXd::Zero(dim, dim)};
        Eigen::VectorXd score(dim);
        Eigen::MatrixXd outer(dim, dim);
        for (std::size_t b = first; b < last; ++b) {
            Rng rng(derive_seed(seed, b, kMcStream));
            const std::size_t count = batch_samples(b, n_samples);
            for (std::size_t s = 0; s < count; ++s) {
                score.setZero();
                for (const auto& t : terms) {
                    // d ell / d s_a = (P - mu) / sigma^2 * d mu / d s_a, with P - mu = sigma z.
                    const double c = rng.normal() / t.sigma;
                    for (int r = 0; r < 3; ++r) {
                        if (t.ua >= 0) score(static_cast<Eigen::Index>(r * n + static_cast<std::size_t>(t.ua))) += c * t.gradient(r);
                        if (t.ub >= 0) score(static_cast<Eigen::Index>(r * n + static_cast<std::size_t>(t.ub))) -= c * t.gradient(r);
                    }
                }
                outer.noalias() = score * score.transpose();
                acc.sum += outer;
                acc.sum_sq += outer.cwiseProduct(outer);
            }
        }
        return acc;
    });
    return finish_moments(parts, static_cast<std::size_t>(dim), n_samples, FimMode::OracleMc);
}

double scene_diameter(const Positions& positions) {
    double best = 0.0;
    for (std::size_t i = 0; i < positions.size(); ++i) {
        for (std::size_t j = i + 1; j < positions.size(); ++j) {
            best = std::max(best, (positions[i] - positions[j]).norm());
        }
    }
    return best;
}

std::vector<double> mean_powers(const MeasurementGraph& graph, const Positions& positions) {
    std::vector<double> out;
    out.reserve(graph.edges().size());
    for (const auto& e : graph.edges()) {
        out.push_back(received_power(
            e.k, (positions.at(static_cast<std::size_t>(e.a)) - positions.at(static_cast<std::size_t>(e.b))).norm(),
            graph.exponent()));
    }
    return out;
}

std::vector<Measurement> sample_measurements(const MeasurementGraph& graph, const Positions& positions,
                                             Rng& rng) {
    const auto means = mean_powers(graph, positions);
    std::vector<Measurement> out;
    out.reserve(means.size());
    for (std::size_t i = 0; i < means.size(); ++i) {
        out.push_back({i, means[i] + graph.edges()[i].sigma * rng.normal()});
    }
    return out;
}

FimMatrix fim_oracle_fd(const MeasurementGraph& graph, const Positions& positions,
                        std::size_t n_samples, double step, std::uint64_t seed) {
    check_positions(graph, positions);
    if (n_samples < kOracleMinSamples) throw std::invalid_argument("oracle needs at least 1000 samples");
    const double diameter = scene_diameter(positions);
    if (!(step >= 1e-6 * diameter && step <= 1e-2 * diameter)) {
        throw std::invalid_argument("finite-difference step must lie in [1e-6, 1e-2] x scene diameter");
    }
    const std::size_t n = graph.unknown_count();
    const auto dim = static_cast<Eigen::Index>(3 * n);

    auto parts = run_chunks<MomentSums>(n_samples, [&](std::size_t first, std::size_t last) {
        MomentSums acc{Eigen::MatrixXd::Zero(dim, dim), Eigen::MatrixXd::Zero(dim, dim)};
        Positions work = positions;
        Eigen::MatrixXd neg_hessian(dim, dim);
        const auto coord = [&](Eigen::Index p) -> double& {
            const auto axis = static_cast<std::size_t>(p) / n;
            const auto thing = static_cast<std::size_t>(p) % n;
            return work[static_cast<std::size_t>(graph.node_of_unknown(thing))](static_cast<Eigen::Index>(axis));
        };
        for (std::size_t b = first; b < last; ++b) {
            Rng rng(derive_seed(seed, b, kFdStream));
            const std::size_t count = batch_samples(b, n_samples);
            for (std::size_t s = 0; s < count; ++s) {
                const auto meas = sample_measurements(graph, positions, rng);
                const auto ell = [&] { return log_likelihood(meas, work, graph); };
                const double center = ell();
                for (Eigen::Index p = 0; p < dim; ++p) {
                    const double orig = coord(p);
                    coord(p) = orig + step;
                    const double plus = ell();
                    coord(p) = orig - step;
                    const double minus = ell();
                    coord(p) = orig;
                    neg_hessian(p, p) = -(plus - 2.0 * center + minus) / (step * step);
                    for (Eigen::Index q = 0; q < p; ++q) {
                        const double orig_q = coord(q);
                        double f[4];
                        const double sp[4] = {step, step, -step, -step};
                        const double sq[4] = {step, -step, step, -step};
                        for (int c = 0; c < 4; ++c) {
                            coord(p) = orig + sp[c];
                            coord(q) = orig_q + sq[c];
                            f[c] = ell();
                        }
                        coord(p) = orig;
                        coord(q) = orig_q;
                        const double h = (f[0] - f[1] - f[2] + f[3]) / (4.0 * step * step);
                        neg_hessian(p, q) = -h;
                        neg_hessian(q, p) = -h;
                    }
                }
                acc.sum += neg_hessian;
                acc.sum_sq += neg_hessian.cwiseProduct(neg_hessian);
            }
        }
        return acc;
    });
    return finish_moments(parts, static_cast<std::size_t>(dim), n_samples, FimMode::OracleFd);
}

}  // namespace micrlb
