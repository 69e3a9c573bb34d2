#pragma once

#include <array>
#include <cstdint>

namespace micrlb {

// Seed mixing. Every derived stream in the toolkit is keyed through this
// function so that results are identical across platforms and thread counts:
//
//   h = splitmix64(master ^ 0x9e3779b97f4a7c15)
//   h = splitmix64(h ^ a)
//   h = splitmix64(h ^ b)
//
// where splitmix64 is the finalizer of Steele/Lea/Flood's SplitMix64.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0);

/// xoshiro256** generator with explicitly specified floating-point and
/// Gaussian transforms (the standard library distributions are not
/// bit-reproducible across implementations).
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next();

    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via the Marsaglia polar method.
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }

private:
    std::array<std::uint64_t, 4> s_{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace micrlb
