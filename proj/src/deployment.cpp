#include "micrlb/deployment.hpp"

#include "micrlb/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

namespace micrlb {

namespace {

constexpr int kMaxRejections = 10000;

void require_positive(double v, const char* name) {
    if (!(v > 0.0)) throw std::invalid_argument(std::string("scenario ") + name + " must be positive");
}

std::pair<int, int> ordered(int a, int b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

// Point at arc length t along the L-shaped well: a vertical section of length
// span ending at the heel (x0, y0 - offset, depth), then a horizontal lateral
// of length span along +x.
Vec3 lateral_point(const ScenarioConfig& c, double t) {
    const Vec3 heel = c.box_center() - Vec3(0.0, c.well_offset, 0.0);
    if (t <= c.well_span) return heel - Vec3(0.0, 0.0, c.well_span - t);
    return heel + Vec3(t - c.well_span, 0.0, 0.0);
}

double segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
    const Vec3 ab = b - a;
    const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

}  // namespace

std::string to_string(AnchorPlacement p) {
    switch (p) {
        case AnchorPlacement::WellLine: return "well_line";
        case AnchorPlacement::WellLateral: return "well_lateral";
        case AnchorPlacement::Explicit: return "explicit";
    }
    return "?";
}

std::string to_string(LinkMode m) {
    return m == LinkMode::AnchorOnly ? "anchor_only" : "cooperative";
}

AnchorPlacement anchor_placement_from_string(const std::string& s) {
    if (s == "well_line") return AnchorPlacement::WellLine;
    if (s == "well_lateral") return AnchorPlacement::WellLateral;
    if (s == "explicit") return AnchorPlacement::Explicit;
    throw std::invalid_argument("unknown anchor placement '" + s + "'");
}

LinkMode link_mode_from_string(const std::string& s) {
    if (s == "anchor_only") return LinkMode::AnchorOnly;
    if (s == "cooperative") return LinkMode::Cooperative;
    throw std::invalid_argument("unknown link mode '" + s + "'");
}

std::string to_string(LinkKind k) { return k == LinkKind::AnchorLink ? "anchor_link" : "peer_link"; }

LinkKind link_kind_from_string(const std::string& s) {
    if (s == "anchor_link") return LinkKind::AnchorLink;
    if (s == "peer_link") return LinkKind::PeerLink;
    throw std::invalid_argument("unknown link kind '" + s + "'");
}

std::string to_string(NoiseModel::Mode m) { return m == NoiseModel::Mode::Power ? "power" : "ranging"; }

NoiseModel::Mode noise_mode_from_string(const std::string& s) {
    if (s == "power") return NoiseModel::Mode::Power;
    if (s == "ranging") return NoiseModel::Mode::Ranging;
    throw std::invalid_argument("unknown noise mode '" + s + "'");
}

bool ScenarioConfig::in_box(const Vec3& p) const {
    const Vec3 rel = (p - box_center()).cwiseAbs();
    const Vec3 half = box_half_extent();
    return (rel.array() <= half.array()).all();
}

bool ScenarioConfig::on_well(const Vec3& p, double tol) const {
    switch (anchor_placement) {
        case AnchorPlacement::WellLine: {
            const Vec3 bottom = box_center();
            const Vec3 top = bottom - Vec3(0.0, 0.0, well_span);
            return segment_distance(p, top, bottom) <= tol;
        }
        case AnchorPlacement::WellLateral: {
            const Vec3 top = lateral_point(*this, 0.0);
            const Vec3 heel = lateral_point(*this, well_span);
            const Vec3 toe = lateral_point(*this, 2.0 * well_span);
            return segment_distance(p, top, heel) <= tol || segment_distance(p, heel, toe) <= tol;
        }
        case AnchorPlacement::Explicit:
            return std::any_of(anchor_positions.begin(), anchor_positions.end(),
                               [&](const Vec3& a) { return (a - p).norm() <= tol; });
    }
    return false;
}

void ScenarioConfig::validate() const {
    require_positive(fracture_width, "fracture_width");
    require_positive(fracture_length, "fracture_length");
    require_positive(fracture_thickness, "fracture_thickness");
    require_positive(depth, "depth");
    require_positive(comm_range_anchor, "comm_range_anchor");
    require_positive(comm_range_peer, "comm_range_peer");
    require_positive(min_separation, "min_separation");
    require_positive(well_span, "well_span");
    if (!(well_offset >= 0.0)) throw std::invalid_argument("scenario well_offset must be >= 0");
    if (anchor_count < 1) throw std::invalid_argument("scenario anchor_count must be >= 1");
    if (thing_count < 1) throw std::invalid_argument("scenario thing_count must be >= 1");
    if (anchor_placement == AnchorPlacement::Explicit &&
        anchor_positions.size() < static_cast<std::size_t>(anchor_count)) {
        throw std::invalid_argument("explicit anchor placement lists fewer positions than anchor_count");
    }
}

Positions Deployment::all_positions() const {
    Positions out = anchors;
    out.insert(out.end(), things.begin(), things.end());
    return out;
}

Positions place_anchors(const ScenarioConfig& c) {
    const auto m = static_cast<std::size_t>(c.anchor_count);
    Positions anchors;
    anchors.reserve(m);
    switch (c.anchor_placement) {
        case AnchorPlacement::WellLine: {
            const Vec3 bottom = c.box_center();
            for (std::size_t i = 0; i < m; ++i) {
                const double frac = m == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(m - 1);
                anchors.push_back(bottom - Vec3(0.0, 0.0, c.well_span * (1.0 - frac)));
            }
            break;
        }
        case AnchorPlacement::WellLateral:
            for (std::size_t i = 0; i < m; ++i) {
                const double t = m == 1 ? c.well_span
                                        : 2.0 * c.well_span * static_cast<double>(i) /
                                              static_cast<double>(m - 1);
                anchors.push_back(lateral_point(c, t));
            }
            break;
        case AnchorPlacement::Explicit:
            anchors.assign(c.anchor_positions.begin(), c.anchor_positions.begin() + static_cast<long>(m));
            break;
    }
    return anchors;
}

Deployment generate_deployment(const ScenarioConfig& config, std::uint64_t seed) {
    config.validate();
    Deployment dep;
    dep.seed = seed;
    dep.anchors = place_anchors(config);
    for (std::size_t i = 0; i < dep.anchors.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (pairwise_distance(dep.anchors[i], dep.anchors[j]) < config.min_separation) {
                throw DeploymentError("anchors " + std::to_string(j) + " and " + std::to_string(i) +
                                      " violate the separation floor");
            }
        }
    }

    Rng rng(seed);
    const Vec3 lo = config.box_center() - config.box_half_extent();
    const Vec3 hi = config.box_center() + config.box_half_extent();
    // Things are bucketed on a grid of min_separation cells, so only the 27
    // surrounding cells need checking.
    const double cell = config.min_separation;
    const auto cell_of = [&](const Vec3& p) {
        return std::array<std::int64_t, 3>{static_cast<std::int64_t>(std::floor((p.x() - lo.x()) / cell)),
                                           static_cast<std::int64_t>(std::floor((p.y() - lo.y()) / cell)),
                                           static_cast<std::int64_t>(std::floor((p.z() - lo.z()) / cell))};
    };
    std::map<std::array<std::int64_t, 3>, std::vector<std::size_t>> grid;
    const auto too_close = [&](const Vec3& p) {
        const auto near = [&](const Vec3& q) { return pairwise_distance(p, q) < config.min_separation; };
        if (std::any_of(dep.anchors.begin(), dep.anchors.end(), near)) return true;
        const auto c = cell_of(p);
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                for (std::int64_t dz = -1; dz <= 1; ++dz) {
                    const auto it = grid.find({c[0] + dx, c[1] + dy, c[2] + dz});
                    if (it == grid.end()) continue;
                    for (std::size_t i : it->second) {
                        if (near(dep.things[i])) return true;
                    }
                }
            }
        }
        return false;
    };
    dep.things.reserve(static_cast<std::size_t>(config.thing_count));
    for (int n = 0; n < config.thing_count; ++n) {
        int attempt = 0;
        for (;; ++attempt) {
            if (attempt == kMaxRejections) {
                throw DeploymentError("could not place thing " + std::to_string(n) + " after " +
                                      std::to_string(kMaxRejections) +
                                      " attempts; the fracture box is too crowded");
            }
            const double x = rng.uniform(lo.x(), hi.x());
            const double y = rng.uniform(lo.y(), hi.y());
            const double z = rng.uniform(lo.z(), hi.z());
            const Vec3 p(x, y, z);
            if (!too_close(p)) {
                grid[cell_of(p)].push_back(dep.things.size());
                dep.things.push_back(p);
                break;
            }
        }
    }
    return dep;
}

double pairwise_distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

MeasurementGraph::MeasurementGraph(std::vector<NodeKind> nodes, PathLossExponent exponent)
    : nodes_(std::move(nodes)), exponent_(exponent) {
    unknown_index_.assign(nodes_.size(), -1);
    for (std::size_t id = 0; id < nodes_.size(); ++id) {
        if (nodes_[id] == NodeKind::Thing) {
            unknown_index_[id] = static_cast<int>(thing_ids_.size());
            thing_ids_.push_back(static_cast<int>(id));
        }
    }
}

void MeasurementGraph::add_edge(const Edge& edge) {
    const auto n = static_cast<int>(nodes_.size());
    if (edge.a < 0 || edge.b < 0 || edge.a >= n || edge.b >= n) {
        throw std::invalid_argument("edge endpoint out of range");
    }
    if (edge.a == edge.b) throw std::invalid_argument("self-edge on node " + std::to_string(edge.a));
    const NodeKind ka = nodes_[static_cast<std::size_t>(edge.a)];
    const NodeKind kb = nodes_[static_cast<std::size_t>(edge.b)];
    if (ka == NodeKind::Anchor && kb == NodeKind::Anchor) {
        throw std::invalid_argument("anchor-anchor links carry no information");
    }
    const LinkKind expected =
        (ka == NodeKind::Anchor || kb == NodeKind::Anchor) ? LinkKind::AnchorLink : LinkKind::PeerLink;
    if (edge.kind != expected) throw std::invalid_argument("edge kind does not match its endpoints");
    if (!(edge.sigma > 0.0)) throw std::invalid_argument("edge sigma must be positive");
    if (!(edge.k >= 0.0) || !std::isfinite(edge.k)) throw std::invalid_argument("edge k must be >= 0");
    const auto key = ordered(edge.a, edge.b);
    if (!pairs_.insert(key).second) {
        throw std::invalid_argument("duplicate edge " + std::to_string(key.first) + "-" +
                                    std::to_string(key.second));
    }
    edges_.push_back(edge);
}

std::vector<int> MeasurementGraph::unobserved_things() const {
    std::vector<bool> seen(nodes_.size(), false);
    for (const auto& e : edges_) {
        seen[static_cast<std::size_t>(e.a)] = true;
        seen[static_cast<std::size_t>(e.b)] = true;
    }
    std::vector<int> out;
    for (int id : thing_ids_) {
        if (!seen[static_cast<std::size_t>(id)]) out.push_back(id);
    }
    return out;
}

MeasurementGraph MeasurementGraph::with_scaled_k(double c) const {
    MeasurementGraph g = *this;
    for (auto& e : g.edges_) e.k *= c;
    return g;
}

MeasurementGraph MeasurementGraph::with_scaled_sigma(double c) const {
    MeasurementGraph g = *this;
    for (auto& e : g.edges_) e.sigma *= c;
    return g;
}

double NoiseModel::link_sigma(double k, double distance, PathLossExponent exponent) const {
    if (mode == Mode::Power) return sigma * unit;
    return power_distance_slope(k, distance, exponent) * sigma;
}

void NoiseModel::validate() const {
    if (!(sigma > 0.0)) throw std::domain_error("noise sigma must be positive");
    if (!(unit > 0.0)) throw std::domain_error("noise unit must be positive");
}

void LinkBudget::validate() const {
    channel.validate();
    anchor_coil.validate();
    thing_coil.validate();
    noise.validate();
}

double LinkBudget::link_coupling(int a, int b, LinkKind kind) const {
    double angle = channel.misalignment_angle;
    const auto key = ordered(a, b);
    for (const auto& o : alpha_overrides) {
        if (ordered(o.a, o.b) == key) angle = o.angle;
    }
    const CoilSpec& tx = kind == LinkKind::AnchorLink ? anchor_coil : thing_coil;
    return coupling_constant(tx, thing_coil, channel, angle);
}

MeasurementGraph build_measurement_graph(const Deployment& dep, const ScenarioConfig& config,
                                         const LinkBudget& budget) {
    budget.validate();
    const int m = static_cast<int>(dep.anchors.size());
    const int n = static_cast<int>(dep.things.size());
    std::vector<NodeKind> kinds(static_cast<std::size_t>(m), NodeKind::Anchor);
    kinds.resize(static_cast<std::size_t>(m + n), NodeKind::Thing);
    MeasurementGraph graph(std::move(kinds), budget.channel.path_loss_exponent);
    const Positions pos = dep.all_positions();
    const PathLossExponent exponent = budget.channel.path_loss_exponent;

    const auto link = [&](int a, int b, LinkKind kind) {
        const double d = pairwise_distance(pos[static_cast<std::size_t>(a)], pos[static_cast<std::size_t>(b)]);
        const double k = budget.link_coupling(a, b, kind);
        graph.add_edge({a, b, kind, k, budget.noise.link_sigma(k, d, exponent)});
    };
    for (int t = m; t < m + n; ++t) {
        for (int a = 0; a < m; ++a) {
            if (pairwise_distance(pos[static_cast<std::size_t>(t)], pos[static_cast<std::size_t>(a)]) <=
                config.comm_range_anchor) {
                link(a, t, LinkKind::AnchorLink);
            }
        }
    }
    if (config.link_mode == LinkMode::Cooperative) {
        for (int t = m; t < m + n; ++t) {
            for (int u = t + 1; u < m + n; ++u) {
                if (pairwise_distance(pos[static_cast<std::size_t>(t)], pos[static_cast<std::size_t>(u)]) <=
                    config.comm_range_peer) {
                    link(t, u, LinkKind::PeerLink);
                }
            }
        }
    }
    return graph;
}

}  // namespace micrlb
