#pragma once

#include "micrlb/deployment.hpp"

#include <cmath>
#include <vector>

namespace micrlb::testing {

inline double rel_err(double a, double b) {
    const double s = std::max(std::abs(a), std::abs(b));
    return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

/// Anchors first, then things; every thing links to every anchor with the
/// same k and sigma. Peer links join consecutive things when `peers` is set.
inline MeasurementGraph star_graph(std::size_t anchors, std::size_t things, double k, double sigma,
                                   bool peers = false, PathLossExponent e = PathLossExponent::Sixth) {
    std::vector<NodeKind> kinds(anchors, NodeKind::Anchor);
    kinds.insert(kinds.end(), things, NodeKind::Thing);
    MeasurementGraph g(kinds, e);
    for (std::size_t t = 0; t < things; ++t) {
        for (std::size_t a = 0; a < anchors; ++a) {
            g.add_edge({static_cast<int>(a), static_cast<int>(anchors + t), LinkKind::AnchorLink, k, sigma});
        }
    }
    if (peers) {
        for (std::size_t t = 1; t < things; ++t) {
            g.add_edge({static_cast<int>(anchors + t - 1), static_cast<int>(anchors + t), LinkKind::PeerLink, k,
                        sigma});
        }
    }
    return g;
}

/// Four non-coplanar anchors around the origin plus things near it.
inline Positions tetra_scene(std::size_t things) {
    Positions p{{3.0, 0.0, 0.0}, {-1.0, 2.5, 0.3}, {-1.2, -2.2, -0.4}, {0.2, 0.1, 3.0}};
    for (std::size_t t = 0; t < things; ++t) {
        const double s = static_cast<double>(t);
        p.push_back({0.3 + 0.4 * s, -0.2 + 0.25 * s, 0.1 - 0.15 * s});
    }
    return p;
}

}  // namespace micrlb::testing
