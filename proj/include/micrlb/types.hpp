#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <vector>

namespace micrlb {

using Vec3 = Eigen::Vector3d;
using Positions = std::vector<Vec3>;

/// Separation below which two coils are treated as co-located.
inline constexpr double kCoincidentDistance = 1e-6;

class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, Positions last_iterate)
        : std::runtime_error(what), last_iterate_(std::move(last_iterate)) {}
    const Positions& last_iterate() const { return last_iterate_; }

private:
    Positions last_iterate_;
};

}  // namespace micrlb
