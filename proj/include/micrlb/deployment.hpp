#pragma once

#include "micrlb/channel.hpp"
#include "micrlb/types.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace micrlb {

enum class AnchorPlacement { WellLine, WellLateral, Explicit };
enum class LinkMode { AnchorOnly, Cooperative };

std::string to_string(AnchorPlacement p);
std::string to_string(LinkMode m);
AnchorPlacement anchor_placement_from_string(const std::string& s);
LinkMode link_mode_from_string(const std::string& s);

/// Reservoir layout. Things live in an axis-aligned box centered at
/// (0, 0, depth); z grows downward.
struct ScenarioConfig {
    double fracture_width = 8.0;      // x extent, m
    double fracture_length = 8.0;     // y extent, m
    double fracture_thickness = 2.0;  // z extent, m
    double depth = 1800.0;            // m
    int anchor_count = 3;
    AnchorPlacement anchor_placement = AnchorPlacement::WellLateral;
    Positions anchor_positions;  // explicit mode; the first anchor_count are used
    double well_offset = 10.0;   // horizontal standoff of the well_lateral path, m
    double well_span = 8.0;      // length of each instrumented well section, m
    int thing_count = 60;
    double comm_range_anchor = 50.0;
    double comm_range_peer = 3.0;
    LinkMode link_mode = LinkMode::AnchorOnly;
    double min_separation = 1e-3;
    double temperature = 418.0;  // K, carried as metadata only

    Vec3 box_center() const { return {0.0, 0.0, depth}; }
    Vec3 box_half_extent() const {
        return {fracture_width / 2.0, fracture_length / 2.0, fracture_thickness / 2.0};
    }
    bool in_box(const Vec3& p) const;
    /// True when p lies on the well path used by the configured placement.
    bool on_well(const Vec3& p, double tol = 1e-9) const;
    void validate() const;
};

struct Deployment {
    Positions anchors;
    Positions things;
    std::uint64_t seed = 0;

    /// Node-id ordered positions: anchors 0..M-1, then things M..M+N-1.
    Positions all_positions() const;
};

class DeploymentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Anchors first (deterministic), then things uniform in the box with
/// rejection resampling against the separation floor.
Deployment generate_deployment(const ScenarioConfig& config, std::uint64_t seed);

/// Anchor coordinates for the configured placement rule.
Positions place_anchors(const ScenarioConfig& config);

double pairwise_distance(const Vec3& a, const Vec3& b);

enum class NodeKind { Anchor, Thing };
enum class LinkKind { AnchorLink, PeerLink };

std::string to_string(LinkKind k);
LinkKind link_kind_from_string(const std::string& s);

struct Edge {
    int a = 0;
    int b = 0;
    LinkKind kind = LinkKind::AnchorLink;
    double k = 0.0;
    double sigma = 0.0;
};

/// Undirected set of power-measurement links. Anchors are known nodes and
/// carry no unknowns; every thing owns three unknown coordinates.
class MeasurementGraph {
public:
    MeasurementGraph() = default;
    MeasurementGraph(std::vector<NodeKind> nodes, PathLossExponent exponent);

    /// Throws std::invalid_argument on self-edges, duplicate pairs, bad ids,
    /// anchor-anchor pairs, a kind that does not match the endpoints, or
    /// non-positive sigma.
    void add_edge(const Edge& edge);

    const std::vector<NodeKind>& nodes() const { return nodes_; }
    const std::vector<Edge>& edges() const { return edges_; }
    PathLossExponent exponent() const { return exponent_; }

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t unknown_count() const { return thing_ids_.size(); }
    /// Unknown (thing) index of a node, or -1 for anchors.
    int unknown_index(int node) const { return unknown_index_.at(static_cast<std::size_t>(node)); }
    int node_of_unknown(std::size_t u) const { return thing_ids_.at(u); }

    /// Things that appear in no edge; a non-empty result means the FIM is
    /// singular.
    std::vector<int> unobserved_things() const;

    MeasurementGraph with_scaled_k(double c) const;
    MeasurementGraph with_scaled_sigma(double c) const;

private:
    std::vector<NodeKind> nodes_;
    std::vector<Edge> edges_;
    std::set<std::pair<int, int>> pairs_;
    std::vector<int> unknown_index_;
    std::vector<int> thing_ids_;
    PathLossExponent exponent_ = PathLossExponent::Sixth;
};

/// How per-link noise is specified.
///  - Power: sigma is a power-domain standard deviation in units of `unit` watts.
///  - Ranging: sigma is an equivalent ranging error in meters; the per-link
///    power deviation is |d mu / d d| * sigma.
struct NoiseModel {
    enum class Mode { Power, Ranging };
    Mode mode = Mode::Power;
    double sigma = 0.05;
    double unit = 1e-12;

    double link_sigma(double k, double distance, PathLossExponent exponent) const;
    void validate() const;
};

std::string to_string(NoiseModel::Mode m);
NoiseModel::Mode noise_mode_from_string(const std::string& s);

struct AlphaOverride {
    int a = 0;
    int b = 0;
    double angle = kPi / 2.0;
};

/// Everything besides geometry that determines per-link k and sigma.
struct LinkBudget {
    ChannelParams channel;
    CoilSpec anchor_coil{20, 0.02};
    CoilSpec thing_coil{20, 0.02};
    NoiseModel noise;
    std::vector<AlphaOverride> alpha_overrides;

    void validate() const;
    /// Anchors transmit on anchor links; peer links pair two thing coils.
    double link_coupling(int a, int b, LinkKind kind) const;
};

MeasurementGraph build_measurement_graph(const Deployment& dep, const ScenarioConfig& config,
                                         const LinkBudget& budget);

}  // namespace micrlb
