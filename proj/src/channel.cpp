#include "micrlb/channel.hpp"

#include "micrlb/deployment.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace micrlb {

namespace {

void require_positive(double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw std::domain_error(std::string(name) + " must be positive and finite, got " +
                                std::to_string(value));
    }
}

double checked_distance(double distance) {
    if (!(distance >= kCoincidentDistance)) {
        throw std::domain_error("link distance " + std::to_string(distance) +
                                " m is below the co-location limit");
    }
    return distance;
}

}  // namespace

void CoilSpec::validate() const {
    if (turns < 1) throw std::domain_error("coil turns must be >= 1");
    if (!(radius >= kMinRadius && radius <= kMaxRadius)) {
        throw std::domain_error("coil radius " + std::to_string(radius) +
                                " m outside [1e-4, 1] m");
    }
}

PathLossExponent path_loss_from_int(int value) {
    switch (value) {
        case 6: return PathLossExponent::Sixth;
        case 3: return PathLossExponent::Cubic;
        default: throw std::domain_error("path loss exponent must be 6 or 3");
    }
}

void ChannelParams::validate() const {
    require_positive(frequency, "frequency");
    require_positive(permeability, "permeability");
    require_positive(unit_length_resistance, "unit_length_resistance");
    require_positive(transmit_power, "transmit_power");
    if (!std::isfinite(misalignment_angle)) throw std::domain_error("misalignment angle must be finite");
}

void NoiseSpec::validate() const { require_positive(sigma, "noise sigma"); }

double coupling_constant(const CoilSpec& tx, const CoilSpec& rx, const ChannelParams& params) {
    return coupling_constant(tx, rx, params, params.misalignment_angle);
}

double coupling_constant(const CoilSpec& tx, const CoilSpec& rx, const ChannelParams& params,
                         double misalignment_angle) {
    tx.validate();
    rx.validate();
    params.validate();
    const double s = std::sin(misalignment_angle);
    if (s == 0.0) return 0.0;
    const double rt3 = tx.radius * tx.radius * tx.radius;
    const double rr3 = rx.radius * rx.radius * rx.radius;
    return params.angular_frequency() * params.permeability * params.transmit_power * rx.turns *
           rt3 * rr3 * s * s / (16.0 * params.unit_length_resistance);
}

double received_power(double k, double distance, PathLossExponent exponent) {
    checked_distance(distance);
    return k / std::pow(distance, order(exponent));
}

Vec3 mean_power_gradient(double k, const Vec3& s_i, const Vec3& s_j, PathLossExponent exponent) {
    const Vec3 diff = s_i - s_j;
    const double d = checked_distance(diff.norm());
    const int e = order(exponent);
    return (-e * k / std::pow(d, e + 2)) * diff;
}

Eigen::Matrix3d mean_power_hessian(double k, const Vec3& s_i, const Vec3& s_j,
                                   PathLossExponent exponent) {
    const Vec3 diff = s_i - s_j;
    const double d = checked_distance(diff.norm());
    const int e = order(exponent);
    const double a = -e * k / std::pow(d, e + 2);
    const double b = e * (e + 2) * k / std::pow(d, e + 4);
    return a * Eigen::Matrix3d::Identity() + b * diff * diff.transpose();
}

double power_distance_slope(double k, double distance, PathLossExponent exponent) {
    checked_distance(distance);
    const int e = order(exponent);
    return e * std::abs(k) / std::pow(distance, e + 1);
}

double sample_measurement(double k, double distance, const NoiseSpec& noise,
                          PathLossExponent exponent, Rng& rng) {
    noise.validate();
    return received_power(k, distance, exponent) + noise.sigma * rng.normal();
}

double log_likelihood(std::span<const Measurement> measurements, const Positions& positions,
                      const MeasurementGraph& graph) {
    static const double kHalfLog2Pi = 0.5 * std::log(2.0 * kPi);
    const auto& edges = graph.edges();
    double total = 0.0;
    for (const auto& m : measurements) {
        if (m.edge >= edges.size()) throw std::out_of_range("measurement references unknown edge");
        const Edge& e = edges[m.edge];
        const double d = (positions.at(static_cast<std::size_t>(e.a)) -
                          positions.at(static_cast<std::size_t>(e.b)))
                             .norm();
        const double mu = received_power(e.k, d, graph.exponent());
        const double r = (m.value - mu) / e.sigma;
        total += -std::log(e.sigma) - kHalfLog2Pi - 0.5 * r * r;
    }
    return total;
}

}  // namespace micrlb
