#include "micrlb/crlb.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <numeric>

namespace micrlb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Component {
    std::vector<Eigen::Index> indices;
    Eigen::VectorXd scale;  // Jacobi equilibration
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;
};

struct Spectrum {
    std::vector<Component> components;
    double max_abs = 0.0;
    double min_abs = kInf;
    double min_signed = kInf;

    double condition() const {
        if (components.empty()) return 1.0;
        return min_abs > 0.0 ? max_abs / min_abs : kInf;
    }
};

int find_root(std::vector<int>& parent, int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
        parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
        x = parent[static_cast<std::size_t>(x)];
    }
    return x;
}

// Eigendecomposition of a symmetric matrix whose indices are grouped into
// nodes of `group` consecutive entries; nodes with no coupling are split into
// separate components. The spectrum of the equilibrated matrix is the union of
// the component spectra.
Spectrum decompose(const Eigen::MatrixXd& m, int group) {
    const auto dim = m.rows();
    const int nodes = static_cast<int>(dim / group);
    std::vector<int> parent(static_cast<std::size_t>(nodes));
    std::iota(parent.begin(), parent.end(), 0);
    for (int i = 0; i < nodes; ++i) {
        for (int l = i + 1; l < nodes; ++l) {
            if (m.block(i * group, l * group, group, group).cwiseAbs().maxCoeff() > 0.0) {
                parent[static_cast<std::size_t>(find_root(parent, i))] = find_root(parent, l);
            }
        }
    }
    std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(nodes));
    for (int i = 0; i < nodes; ++i) {
        auto& list = members[static_cast<std::size_t>(find_root(parent, i))];
        for (int g = 0; g < group; ++g) list.push_back(i * group + g);
    }

    Spectrum spec;
    for (auto& idx : members) {
        if (idx.empty()) continue;
        Component c;
        const auto k = static_cast<Eigen::Index>(idx.size());
        c.indices = std::move(idx);
        std::sort(c.indices.begin(), c.indices.end());
        c.scale.resize(k);
        Eigen::MatrixXd sub(k, k);
        for (Eigen::Index a = 0; a < k; ++a) {
            const double d = std::abs(m(c.indices[static_cast<std::size_t>(a)], c.indices[static_cast<std::size_t>(a)]));
            c.scale(a) = (d > 0.0 && std::isfinite(d)) ? 1.0 / std::sqrt(d) : 1.0;
        }
        for (Eigen::Index a = 0; a < k; ++a) {
            for (Eigen::Index b = 0; b < k; ++b) {
                sub(a, b) = c.scale(a) * c.scale(b) *
                            m(c.indices[static_cast<std::size_t>(a)], c.indices[static_cast<std::size_t>(b)]);
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sub);
        c.eigenvalues = solver.eigenvalues();
        c.eigenvectors = solver.eigenvectors();
        for (Eigen::Index a = 0; a < k; ++a) {
            const double l = c.eigenvalues(a);
            spec.max_abs = std::max(spec.max_abs, std::abs(l));
            spec.min_abs = std::min(spec.min_abs, std::abs(l));
            spec.min_signed = std::min(spec.min_signed, l);
        }
        spec.components.push_back(std::move(c));
    }
    std::sort(spec.components.begin(), spec.components.end(),
              [](const Component& a, const Component& b) { return a.indices.front() < b.indices.front(); });
    return spec;
}

// Diagonal of the (pseudo-)inverse. Indices in components with an eigenvalue
// at or below the cutoff get +inf unless pseudo is set, in which case those
// eigenvalues are dropped.
Eigen::VectorXd inverse_diagonal(const Spectrum& spec, Eigen::Index dim, double cutoff, bool reject_negative,
                                 bool pseudo) {
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(dim);
    for (const auto& c : spec.components) {
        const auto k = c.eigenvalues.size();
        bool bad = false;
        for (Eigen::Index a = 0; a < k; ++a) {
            const double l = c.eigenvalues(a);
            if (std::abs(l) <= cutoff || (reject_negative && l < 0.0)) bad = true;
        }
        for (Eigen::Index a = 0; a < k; ++a) {
            double value = 0.0;
            if (bad && !pseudo) {
                value = kInf;
            } else {
                for (Eigen::Index j = 0; j < k; ++j) {
                    const double l = c.eigenvalues(j);
                    if (std::abs(l) <= cutoff || (reject_negative && l < 0.0)) continue;
                    value += c.eigenvectors(a, j) * c.eigenvectors(a, j) / l;
                }
                value *= c.scale(a) * c.scale(a);
            }
            diag(c.indices[static_cast<std::size_t>(a)]) = value;
        }
    }
    return diag;
}

const char* block_name(int axis) {
    static const char* names[] = {"I_xx", "I_yy", "I_zz"};
    return names[axis];
}

}  // namespace

SingularBlockError::SingularBlockError(std::string block, double condition)
    : std::runtime_error(block + " is singular (condition number " + std::to_string(condition) + ")"),
      block_(std::move(block)),
      condition_(condition) {}

double crlb_paper(const FimMatrix& fim, double cond_threshold) {
    const std::size_t n = fim.things();
    if (n == 0) return 0.0;
    Eigen::VectorXd total = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (int axis = 0; axis < 3; ++axis) {
        const Eigen::MatrixXd block = fim.axis_block(static_cast<Axis>(axis), static_cast<Axis>(axis));
        const Spectrum spec = decompose(block, 1);
        const double cond = spec.condition();
        if (!(cond <= cond_threshold)) throw SingularBlockError(block_name(axis), cond);
        total += inverse_diagonal(spec, block.rows(), 0.0, false, false);
    }
    return total.mean();
}

CrlbReport crlb_standard(const FimMatrix& fim, const CrlbOptions& options) {
    CrlbReport report;
    report.mode = fim.mode;
    const std::size_t n = fim.things();
    if (n == 0) {
        report.condition_number = 1.0;
        return report;
    }
    const Eigen::MatrixXd node_major = fim.node_major();
    const Spectrum spec = decompose(node_major, 3);
    report.condition_number = spec.condition();
    report.indefinite = spec.min_signed < 0.0;
    const double cutoff = spec.max_abs / options.cond_threshold;
    report.singular = report.indefinite || !(report.condition_number <= options.cond_threshold);
    report.pseudo_inverse = report.singular && options.allow_pseudo_inverse;

    const Eigen::VectorXd diag =
        inverse_diagonal(spec, node_major.rows(), cutoff, true, report.pseudo_inverse);
    report.per_node_bound.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto base = static_cast<Eigen::Index>(3 * i);
        report.per_node_bound[i] = diag(base) + diag(base + 1) + diag(base + 2);
    }
    report.aggregate_bound =
        std::accumulate(report.per_node_bound.begin(), report.per_node_bound.end(), 0.0) / static_cast<double>(n);
    try {
        report.paper_formula_bound = crlb_paper(fim, options.cond_threshold);
    } catch (const SingularBlockError&) {
        report.paper_formula_bound = std::numeric_limits<double>::quiet_NaN();
    }
    return report;
}

}  // namespace micrlb
