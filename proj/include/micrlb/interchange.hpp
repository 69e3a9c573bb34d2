#pragma once

// Line-oriented deployment/graph file shared by all CLI subcommands:
//
//   # anchors M
//   # things N
//   # exponent 6
//   # seed S
//   id x y z            (one row per node; anchors first, meters)
//   edge a b kind k sigma
//
// Numbers are written with 9 significant digits. Other '#' lines are
// comments.

#include "micrlb/deployment.hpp"

#include <iosfwd>
#include <string>

namespace micrlb {

struct Scene {
    Deployment deployment;
    MeasurementGraph graph;
};

class FormatError : public std::runtime_error {
public:
    FormatError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// "%.9g".
std::string format_number(double v);

void write_scene(std::ostream& out, const Deployment& dep, const MeasurementGraph& graph);
Scene read_scene(std::istream& in);

void save_scene(const std::string& path, const Deployment& dep, const MeasurementGraph& graph);
Scene load_scene(const std::string& path);

}  // namespace micrlb
