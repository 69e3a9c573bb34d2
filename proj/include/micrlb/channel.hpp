#pragma once

// Magnetic-induction link model: coupling constant, mean received power and
// its gradient, Gaussian power noise, and the Gaussian log-likelihood of a set
// of power measurements.

#include "micrlb/rng.hpp"
#include "micrlb/types.hpp"

#include <span>

namespace micrlb {

class MeasurementGraph;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kVacuumPermeability = 4.0e-7 * kPi;

/// Coil antenna geometry. Turns are dimensionless, radius in meters.
struct CoilSpec {
    int turns = 0;
    double radius = 0.0;

    static constexpr double kMinRadius = 1e-4;
    static constexpr double kMaxRadius = 1.0;

    /// Throws std::domain_error when turns < 1 or the radius is outside
    /// [kMinRadius, kMaxRadius].
    void validate() const;
};

enum class PathLossExponent : int { Sixth = 6, Cubic = 3 };

inline int order(PathLossExponent e) { return static_cast<int>(e); }
PathLossExponent path_loss_from_int(int value);

struct ChannelParams {
    double frequency = 7.0e6;               // Hz
    double permeability = kVacuumPermeability;  // H/m
    double unit_length_resistance = 0.01;   // ohm/m
    double transmit_power = 0.1;            // W
    double misalignment_angle = kPi / 2.0;  // rad
    PathLossExponent path_loss_exponent = PathLossExponent::Sixth;

    double angular_frequency() const { return 2.0 * kPi * frequency; }
    void validate() const;
};

struct NoiseSpec {
    double sigma = 0.0;  // W

    void validate() const;
};

/// k = w mu P_t N_r r_t^3 r_r^3 sin^2(alpha) / (16 R_0), in W m^exponent.
double coupling_constant(const CoilSpec& tx, const CoilSpec& rx, const ChannelParams& params);

/// Same with an explicit per-link misalignment angle.
double coupling_constant(const CoilSpec& tx, const CoilSpec& rx, const ChannelParams& params,
                         double misalignment_angle);

/// Mean received power k / d^exponent. Throws std::domain_error for
/// d < kCoincidentDistance.
double received_power(double k, double distance, PathLossExponent exponent);

/// d(mean power)/d(s_i) for a link between s_i and s_j.
Vec3 mean_power_gradient(double k, const Vec3& s_i, const Vec3& s_j, PathLossExponent exponent);

/// Hessian of the mean power w.r.t. s_i (used by the estimator diagnostics
/// and the oracle tests).
Eigen::Matrix3d mean_power_hessian(double k, const Vec3& s_i, const Vec3& s_j,
                                   PathLossExponent exponent);

/// |d(mean power)/dd|, the factor that maps a ranging error to a power error.
double power_distance_slope(double k, double distance, PathLossExponent exponent);

/// One noisy observation: mean power plus N(0, sigma^2). Unclipped.
double sample_measurement(double k, double distance, const NoiseSpec& noise,
                          PathLossExponent exponent, Rng& rng);

struct Measurement {
    std::size_t edge = 0;
    double value = 0.0;
};

/// Sum over measurements of -ln(sigma sqrt(2 pi)) - (P - mu)^2 / (2 sigma^2).
/// `positions` is indexed by node id. Throws std::domain_error when a link's
/// endpoints coincide and std::out_of_range for unknown edges.
double log_likelihood(std::span<const Measurement> measurements, const Positions& positions,
                      const MeasurementGraph& graph);

}  // namespace micrlb
