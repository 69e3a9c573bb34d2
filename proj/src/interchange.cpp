#include "micrlb/interchange.hpp"

#include <fmt/format.h>

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace micrlb {

std::string format_number(double v) { return fmt::format("{:.9g}", v); }

void write_scene(std::ostream& out, const Deployment& dep, const MeasurementGraph& graph) {
    out << "# anchors " << dep.anchors.size() << '\n';
    out << "# things " << dep.things.size() << '\n';
    out << "# exponent " << order(graph.exponent()) << '\n';
    out << "# seed " << dep.seed << '\n';
    const Positions all = dep.all_positions();
    for (std::size_t id = 0; id < all.size(); ++id) {
        out << id << ' ' << format_number(all[id].x()) << ' ' << format_number(all[id].y()) << ' '
            << format_number(all[id].z()) << '\n';
    }
    for (const auto& e : graph.edges()) {
        out << "edge " << e.a << ' ' << e.b << ' ' << to_string(e.kind) << ' ' << format_number(e.k)
            << ' ' << format_number(e.sigma) << '\n';
    }
}

Scene read_scene(std::istream& in) {
    long anchors = -1;
    long things = -1;
    int exponent = 6;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::size_t, Vec3>> rows;
    std::vector<std::pair<std::size_t, Edge>> edges;

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        std::string head;
        if (!(ss >> head)) continue;
        if (head == "#") {
            std::string key;
            ss >> key;
            if (key == "anchors") {
                if (!(ss >> anchors) || anchors < 0) throw FormatError(lineno, "bad anchor count");
            } else if (key == "things") {
                if (!(ss >> things) || things < 0) throw FormatError(lineno, "bad thing count");
            } else if (key == "exponent") {
                if (!(ss >> exponent)) throw FormatError(lineno, "bad exponent");
            } else if (key == "seed") {
                if (!(ss >> seed)) throw FormatError(lineno, "bad seed");
            }
            continue;
        }
        if (head[0] == '#') continue;
        if (head == "edge") {
            Edge e;
            std::string kind;
            if (!(ss >> e.a >> e.b >> kind >> e.k >> e.sigma)) throw FormatError(lineno, "malformed edge row");
            try {
                e.kind = link_kind_from_string(kind);
            } catch (const std::invalid_argument& ex) {
                throw FormatError(lineno, ex.what());
            }
            edges.emplace_back(lineno, e);
            continue;
        }
        std::size_t id = 0;
        double x, y, z;
        std::istringstream row(line);
        if (!(row >> id >> x >> y >> z)) throw FormatError(lineno, "malformed node row");
        rows.emplace_back(lineno, Vec3(x, y, z));
        if (id != rows.size() - 1) throw FormatError(lineno, "node ids must be consecutive from 0");
    }
    if (anchors < 0 || things < 0) throw FormatError(lineno, "missing '# anchors' or '# things' header");
    if (rows.size() != static_cast<std::size_t>(anchors + things)) {
        throw FormatError(lineno, "expected " + std::to_string(anchors + things) + " node rows, found " +
                                      std::to_string(rows.size()));
    }

    Scene scene;
    scene.deployment.seed = seed;
    std::vector<NodeKind> kinds;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const bool is_anchor = i < static_cast<std::size_t>(anchors);
        (is_anchor ? scene.deployment.anchors : scene.deployment.things).push_back(rows[i].second);
        kinds.push_back(is_anchor ? NodeKind::Anchor : NodeKind::Thing);
    }
    try {
        scene.graph = MeasurementGraph(std::move(kinds), path_loss_from_int(exponent));
    } catch (const std::domain_error& ex) {
        throw FormatError(lineno, ex.what());
    }
    for (const auto& [ln, e] : edges) {
        try {
            scene.graph.add_edge(e);
        } catch (const std::invalid_argument& ex) {
            throw FormatError(ln, ex.what());
        }
    }
    return scene;
}

void save_scene(const std::string& path, const Deployment& dep, const MeasurementGraph& graph) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    write_scene(out, dep, graph);
    if (!out) throw std::runtime_error("write failed for " + path);
}

Scene load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    return read_scene(in);
}

}  // namespace micrlb
