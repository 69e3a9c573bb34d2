#pragma once

#include "micrlb/crlb.hpp"
#include "micrlb/deployment.hpp"
#include "micrlb/estimator.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace micrlb {

struct Scenario {
    ScenarioConfig layout;
    LinkBudget budget;
};

enum class SweepParam { NoiseSigma, Frequency, AnchorCount, CoilTurns, CoilRadius, TransmitPower };

std::string to_string(SweepParam p);
SweepParam sweep_param_from_string(const std::string& s);

/// Physical range of a sweepable parameter (the documented ranges for channel and
/// coil quantities).
std::pair<double, double> physical_range(SweepParam p);

/// Copy of `base` with one parameter replaced. coil_turns sets the receiving
/// (thing) coil; coil_radius sets every coil.
Scenario apply_parameter(Scenario base, SweepParam p, double value);

struct MonteCarloOptions {
    FimMode mode = FimMode::Standard;
    CrlbOptions crlb;
    std::size_t oracle_samples = 1000;
    double fd_step_rel = 1e-4;  // times the scene diameter
};

struct MonteCarloSummary {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation over non-singular trials
    std::size_t trials = 0;
    std::size_t singular = 0;
};

class AllTrialsSingularError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Seed of trial `trial` under `master`. Trials are paired across swept
/// values: the same trial index always sees the same deployment draw.
std::uint64_t trial_seed(std::uint64_t master, std::size_t trial);

/// Aggregate bound of a single deployment, or nullopt when the FIM (or, in
/// paper mode, one of its axis blocks) is singular.
std::optional<double> single_trial_bound(const Scenario& scenario, std::uint64_t seed,
                                         const MonteCarloOptions& options);

/// Per-trial bounds in trial order.
std::vector<std::optional<double>> trial_bounds(const Scenario& scenario, std::size_t n_trials,
                                                std::uint64_t master_seed, const MonteCarloOptions& options);

/// Throws AllTrialsSingularError if no trial has a usable FIM.
MonteCarloSummary monte_carlo_crlb(const Scenario& scenario, std::size_t n_trials, std::uint64_t master_seed,
                                   const MonteCarloOptions& options = {});

struct SweepConfig {
    Scenario base;
    SweepParam param = SweepParam::NoiseSigma;
    std::vector<double> values;
    std::optional<SweepParam> series_param;
    std::vector<double> series_values;
    std::size_t trials = 500;
    std::uint64_t seed = 1;
    MonteCarloOptions mc;
    bool allow_out_of_range = false;

    /// Throws std::invalid_argument for empty value lists or values outside
    /// the physical range (unless allowed).
    void validate() const;
};

struct SweepRow {
    double param = 0.0;
    double mean = 0.0;
    double std = 0.0;
    std::size_t trials = 0;
    std::size_t singular = 0;
    std::string status = "ok";
};

struct SweepSeries {
    std::string label;
    std::optional<double> series_value;
    std::vector<SweepRow> rows;
};

struct SweepResult {
    SweepParam param = SweepParam::NoiseSigma;
    std::optional<SweepParam> series_param;
    std::vector<SweepSeries> series;
};

/// One monte_carlo_crlb per (series value, swept value); rows sorted by swept
/// value. Point failures land in the row status instead of aborting.
SweepResult run_sweep(const SweepConfig& cfg);

inline constexpr const char* kCsvHeader = "param,mean_crlb,std_crlb,trials,singular,status";

void emit_csv(const std::vector<SweepRow>& rows, std::ostream& out);
std::vector<SweepRow> parse_csv(std::istream& in);
/// Writes one CSV per series. With a single unlabeled series the path is used
/// as given; otherwise "<stem>_<label><ext>". Returns the written paths.
std::vector<std::string> emit_csv(const SweepResult& result, const std::string& path);

/// Whitespace-separated plot data (first column the swept value, one mean
/// column per series) plus an SVG line chart next to it (same stem, .svg).
/// Returns the SVG path.
std::string emit_plotdata(const SweepResult& result, const std::string& path);

struct EfficiencyOptions {
    std::vector<double> sigma_rel{0.0, 1e-4, 1e-3, 1e-2};  // times the weakest link's mean power
    EstimatorOptions estimator;
    double z = 3.0;
};

struct EfficiencyRow {
    double sigma_rel = 0.0;
    double sigma = 0.0;  // W
    double rmse = 0.0;
    double rmse_se = 0.0;
    double sqrt_bound = 0.0;
    std::size_t trials = 0;
    std::size_t converged = 0;
    bool violates = false;  // rmse < sqrt_bound - z * rmse_se; never set for a single trial

    double ratio() const { return sqrt_bound > 0.0 ? rmse / sqrt_bound : 0.0; }
};

struct EfficiencyStudy {
    Deployment deployment;
    std::vector<EfficiencyRow> rows;
};

/// For each sigma: sample measurements per trial at a fixed deployment,
/// localize starting from the truth, and compare the empirical RMSE with
/// sqrt(aggregate bound).
EfficiencyStudy efficiency_study(const Scenario& scenario, std::size_t n_trials, std::uint64_t seed,
                                 const EfficiencyOptions& options = {});

void emit_efficiency_csv(const std::vector<EfficiencyRow>& rows, std::ostream& out);

}  // namespace micrlb
