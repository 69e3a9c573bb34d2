#pragma once

// Run configuration: line-oriented "section.key = value" text. Blank lines and
// lines starting with '#' are ignored; unknown or repeated keys are errors.
// List values are comma-separated; coordinate lists use "x y z; x y z".

#include "micrlb/experiments.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace micrlb {

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, std::size_t line, const std::string& what);
    const std::string& key() const { return key_; }
    std::size_t line() const { return line_; }

private:
    std::string key_;
    std::size_t line_;
};

struct SweepSection {
    SweepParam param = SweepParam::NoiseSigma;
    std::vector<double> values{0.05, 0.1, 0.2, 0.3, 0.5, 0.7};
    std::optional<SweepParam> series_param;
    std::vector<double> series_values;
    std::size_t trials = 500;
    std::uint64_t seed = 1;
    FimMode fim_mode = FimMode::Standard;
    bool allow_out_of_range = false;
    std::size_t oracle_samples = 1000;
    double cond_threshold = 1e12;
};

struct EstimatorSection {
    std::size_t trials = 1000;
    std::uint64_t seed = 1;
    std::vector<double> sigma_values{0.0, 1e-4, 1e-3, 1e-2};
    int max_iterations = 500;
    double z = 3.0;
};

struct OutputSection {
    std::string deployment = "deployment.txt";
    std::string csv = "sweep.csv";
    std::string plot = "sweep.dat";
    std::string efficiency = "efficiency.csv";
};

struct RunConfig {
    Scenario scenario;
    std::uint64_t scenario_seed = 1;
    SweepSection sweep;
    EstimatorSection estimator;
    OutputSection output;

    SweepConfig sweep_config() const;
    EfficiencyOptions efficiency_options() const;
};

RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

/// Every key with its current value, grouped by section; parse_config of the
/// result reproduces the configuration.
std::string render_config(const RunConfig& cfg);

/// Key names in rendering order.
std::vector<std::string> config_keys();

}  // namespace micrlb
