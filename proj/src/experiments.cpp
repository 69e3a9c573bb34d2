#include "micrlb/experiments.hpp"

#include "micrlb/interchange.hpp"
#include "micrlb/parallel.hpp"
#include "micrlb/plot.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace micrlb {

namespace {

constexpr std::uint64_t kOracleSeedTag = 0xF1;

std::string label_for(SweepParam p, double v) { return to_string(p) + "=" + format_number(v); }

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

std::string series_path(const std::string& path, const std::string& label) {
    std::filesystem::path p(path);
    std::string tag;
    for (char c : label) tag += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-') ? c : '_';
    return (p.parent_path() / (p.stem().string() + "_" + tag + p.extension().string())).string();
}

}  // namespace

std::string to_string(SweepParam p) {
    switch (p) {
        case SweepParam::NoiseSigma: return "noise_sigma";
        case SweepParam::Frequency: return "frequency";
        case SweepParam::AnchorCount: return "anchor_count";
        case SweepParam::CoilTurns: return "coil_turns";
        case SweepParam::CoilRadius: return "coil_radius";
        case SweepParam::TransmitPower: return "transmit_power";
    }
    return "?";
}

SweepParam sweep_param_from_string(const std::string& s) {
    for (auto p : {SweepParam::NoiseSigma, SweepParam::Frequency, SweepParam::AnchorCount, SweepParam::CoilTurns,
                   SweepParam::CoilRadius, SweepParam::TransmitPower}) {
        if (to_string(p) == s) return p;
    }
    throw std::invalid_argument("unknown sweep parameter '" + s + "'");
}

std::pair<double, double> physical_range(SweepParam p) {
    switch (p) {
        case SweepParam::NoiseSigma: return {0.05, 0.7};
        case SweepParam::Frequency: return {7e6, 13e6};
        case SweepParam::AnchorCount: return {1.0, 1e6};
        case SweepParam::CoilTurns: return {10.0, 30.0};
        case SweepParam::CoilRadius: return {0.01, 0.04};
        case SweepParam::TransmitPower: return {0.1, 0.2};
    }
    return {0.0, 0.0};
}

Scenario apply_parameter(Scenario s, SweepParam p, double value) {
    const auto as_int = [&](const char* what) {
        if (value != std::round(value)) throw std::invalid_argument(std::string(what) + " must be an integer");
        return static_cast<int>(value);
    };
    switch (p) {
        case SweepParam::NoiseSigma: s.budget.noise.sigma = value; break;
        case SweepParam::Frequency: s.budget.channel.frequency = value; break;
        case SweepParam::AnchorCount: s.layout.anchor_count = as_int("anchor_count"); break;
        case SweepParam::CoilTurns: s.budget.thing_coil.turns = as_int("coil_turns"); break;
        case SweepParam::CoilRadius:
            s.budget.thing_coil.radius = value;
            s.budget.anchor_coil.radius = value;
            break;
        case SweepParam::TransmitPower: s.budget.channel.transmit_power = value; break;
    }
    return s;
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t trial) {
    return derive_seed(master, static_cast<std::uint64_t>(trial), 0);
}

std::optional<double> single_trial_bound(const Scenario& scenario, std::uint64_t seed,
                                         const MonteCarloOptions& options) {
    const Deployment dep = generate_deployment(scenario.layout, seed);
    const MeasurementGraph graph = build_measurement_graph(dep, scenario.layout, scenario.budget);
    const Positions pos = dep.all_positions();
    FimMatrix fim;
    switch (options.mode) {
        case FimMode::Standard: fim = fim_standard(graph, pos); break;
        case FimMode::Paper: fim = fim_paper(graph, pos); break;
        case FimMode::OracleMc:
            fim = fim_oracle_mc(graph, pos, options.oracle_samples, derive_seed(seed, kOracleSeedTag));
            break;
        case FimMode::OracleFd:
            fim = fim_oracle_fd(graph, pos, options.oracle_samples, options.fd_step_rel * scene_diameter(pos),
                                derive_seed(seed, kOracleSeedTag));
            break;
    }
    if (options.mode == FimMode::Paper) {
        try {
            return crlb_paper(fim, options.crlb.cond_threshold);
        } catch (const SingularBlockError&) {
            return std::nullopt;
        }
    }
    const CrlbReport report = crlb_standard(fim, options.crlb);
    if (report.singular && !report.pseudo_inverse) return std::nullopt;
    return report.aggregate_bound;
}

std::vector<std::optional<double>> trial_bounds(const Scenario& scenario, std::size_t n_trials,
                                                std::uint64_t master_seed, const MonteCarloOptions& options) {
    scenario.layout.validate();
    scenario.budget.validate();
    std::vector<std::optional<double>> out(n_trials);
    parallel_for(n_trials, [&](std::size_t t) {
        out[t] = single_trial_bound(scenario, trial_seed(master_seed, t), options);
    });
    return out;
}

MonteCarloSummary monte_carlo_crlb(const Scenario& scenario, std::size_t n_trials, std::uint64_t master_seed,
                                   const MonteCarloOptions& options) {
    if (n_trials < 1) throw std::invalid_argument("n_trials must be >= 1");
    const auto bounds = trial_bounds(scenario, n_trials, master_seed, options);
    MonteCarloSummary s;
    s.trials = n_trials;
    std::vector<double> good;
    for (const auto& b : bounds) {
        if (b) {
            good.push_back(*b);
        } else {
            ++s.singular;
        }
    }
    if (good.empty()) {
        throw AllTrialsSingularError("all " + std::to_string(n_trials) + " trials produced a singular FIM");
    }
    s.mean = std::accumulate(good.begin(), good.end(), 0.0) / static_cast<double>(good.size());
    if (good.size() > 1) {
        double ss = 0.0;
        for (double b : good) ss += (b - s.mean) * (b - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(good.size() - 1));
    }
    return s;
}

void SweepConfig::validate() const {
    if (values.empty()) throw std::invalid_argument("sweep needs at least one value");
    if (trials < 1) throw std::invalid_argument("sweep trials must be >= 1");
    if (series_param && series_values.empty()) throw std::invalid_argument("series parameter given without values");
    if (allow_out_of_range) return;
    const auto check = [](SweepParam p, const std::vector<double>& vs) {
        const auto [lo, hi] = physical_range(p);
        for (double v : vs) {
            if (!(v >= lo * (1 - 1e-12) && v <= hi * (1 + 1e-12))) {
                throw std::invalid_argument(fmt::format("{} value {} outside the physical range [{}, {}] "
                                                        "(use --allow-out-of-range)",
                                                        to_string(p), v, lo, hi));
            }
        }
    };
    check(param, values);
    if (series_param) check(*series_param, series_values);
}

SweepResult run_sweep(const SweepConfig& cfg) {
    cfg.validate();
    SweepResult result;
    result.param = cfg.param;
    result.series_param = cfg.series_param;

    std::vector<std::optional<double>> series_values;
    if (cfg.series_param) {
        series_values.assign(cfg.series_values.begin(), cfg.series_values.end());
    } else {
        series_values.push_back(std::nullopt);
    }
    std::vector<double> values = cfg.values;
    std::sort(values.begin(), values.end());

    for (const auto& sv : series_values) {
        SweepSeries series;
        series.series_value = sv;
        if (sv) series.label = label_for(*cfg.series_param, *sv);
        const Scenario base = sv ? apply_parameter(cfg.base, *cfg.series_param, *sv) : cfg.base;
        for (double v : values) {
            SweepRow row;
            row.param = v;
            row.trials = cfg.trials;
            try {
                const auto summary = monte_carlo_crlb(apply_parameter(base, cfg.param, v), cfg.trials, cfg.seed, cfg.mc);
                row.mean = summary.mean;
                row.std = summary.std;
                row.singular = summary.singular;
            } catch (const AllTrialsSingularError&) {
                row.mean = row.std = std::numeric_limits<double>::quiet_NaN();
                row.singular = cfg.trials;
                row.status = "all_singular";
            } catch (const std::exception&) {
                row.mean = row.std = std::numeric_limits<double>::quiet_NaN();
                row.status = "error";
                row.singular = 0;
            }
            series.rows.push_back(row);
        }
        result.series.push_back(std::move(series));
    }
    return result;
}

void emit_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
    out << kCsvHeader << '\n';
    for (const auto& r : rows) {
        out << format_number(r.param) << ',' << format_number(r.mean) << ',' << format_number(r.std) << ','
            << r.trials << ',' << r.singular << ',' << r.status << '\n';
    }
}

std::vector<SweepRow> parse_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw std::runtime_error("unexpected CSV header");
    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 6) throw std::runtime_error("malformed CSV row: " + line);
        SweepRow r;
        r.param = std::stod(fields[0]);
        r.mean = std::stod(fields[1]);
        r.std = std::stod(fields[2]);
        r.trials = std::stoul(fields[3]);
        r.singular = std::stoul(fields[4]);
        r.status = fields[5];
        rows.push_back(r);
    }
    return rows;
}

std::vector<std::string> emit_csv(const SweepResult& result, const std::string& path) {
    std::vector<std::string> paths;
    for (const auto& s : result.series) {
        const std::string p = s.label.empty() ? path : series_path(path, s.label);
        std::ostringstream text;
        emit_csv(s.rows, text);
        write_text(p, text.str());
        paths.push_back(p);
    }
    return paths;
}

std::string emit_plotdata(const SweepResult& result, const std::string& path) {
    std::ostringstream dat;
    dat << "# " << to_string(result.param);
    for (const auto& s : result.series) dat << ' ' << (s.label.empty() ? "mean_crlb" : s.label);
    dat << '\n';
    const std::size_t n_rows = result.series.empty() ? 0 : result.series.front().rows.size();
    for (std::size_t i = 0; i < n_rows; ++i) {
        dat << format_number(result.series.front().rows[i].param);
        for (const auto& s : result.series) dat << ' ' << format_number(s.rows[i].mean);
        dat << '\n';
    }
    write_text(path, dat.str());

    std::vector<PlotSeries> series;
    for (const auto& s : result.series) {
        PlotSeries ps;
        ps.label = s.label.empty() ? "mean CRLB" : s.label;
        for (const auto& r : s.rows) {
            ps.x.push_back(r.param);
            ps.y.push_back(r.mean);
        }
        series.push_back(std::move(ps));
    }
    const std::string svg_path = std::filesystem::path(path).replace_extension(".svg").string();
    write_text(svg_path, svg_line_chart("CRLB vs. " + to_string(result.param), to_string(result.param),
                                        "mean CRLB (m^2)", series, true));
    return svg_path;
}

EfficiencyStudy efficiency_study(const Scenario& scenario, std::size_t n_trials, std::uint64_t seed,
                                 const EfficiencyOptions& options) {
    if (n_trials < 1) throw std::invalid_argument("n_trials must be >= 1");
    EfficiencyStudy study;
    study.deployment = generate_deployment(scenario.layout, trial_seed(seed, 0));
    const Positions truth_all = study.deployment.all_positions();
    const Positions& truth = study.deployment.things;

    // Signal scale: the weakest link's mean power.
    const MeasurementGraph probe = build_measurement_graph(study.deployment, scenario.layout, scenario.budget);
    if (probe.edges().empty()) throw std::invalid_argument("efficiency scenario has no links");
    if (!probe.unobserved_things().empty()) throw std::invalid_argument("efficiency scenario has unobserved things");
    const auto powers = mean_powers(probe, truth_all);
    const double scale = *std::min_element(powers.begin(), powers.end());

    double weight_rel = 0.0;
    for (double s : options.sigma_rel) {
        if (s > 0.0) weight_rel = weight_rel == 0.0 ? s : std::min(weight_rel, s);
    }
    if (weight_rel == 0.0) weight_rel = 1e-6;

    EstimatorOptions est = options.estimator;
    est.box = SearchBox{scenario.layout.box_center(), scenario.layout.box_half_extent()};
    est.truth = truth;

    for (std::size_t si = 0; si < options.sigma_rel.size(); ++si) {
        const double rel = options.sigma_rel[si];
        if (rel < 0.0) throw std::invalid_argument("sigma values must be >= 0");
        LinkBudget budget = scenario.budget;
        budget.noise.mode = NoiseModel::Mode::Power;
        budget.noise.unit = 1.0;
        budget.noise.sigma = (rel > 0.0 ? rel : weight_rel) * scale;
        const MeasurementGraph graph = build_measurement_graph(study.deployment, scenario.layout, budget);

        EfficiencyRow row;
        row.sigma_rel = rel;
        row.sigma = rel * scale;
        row.trials = n_trials;
        if (rel > 0.0) {
            const CrlbReport report = crlb_standard(fim_standard(graph, truth_all));
            row.sqrt_bound = report.singular ? std::numeric_limits<double>::infinity()
                                             : std::sqrt(report.aggregate_bound);
        }

        std::vector<double> msq(n_trials);
        std::vector<char> conv(n_trials);
        parallel_for(n_trials, [&](std::size_t t) {
            Rng rng(derive_seed(seed, t, 1 + si));
            auto meas = sample_measurements(graph, truth_all, rng);
            if (rel == 0.0) {
                const auto mu = mean_powers(graph, truth_all);
                for (std::size_t i = 0; i < meas.size(); ++i) meas[i].value = mu[i];
            }
            const EstimateResult res = mle_localize(graph, meas, truth_all, est);
            double sq = 0.0;
            for (double e : res.per_node_error) sq += e * e;
            msq[t] = sq / static_cast<double>(truth.size());
            conv[t] = res.converged ? 1 : 0;
        });
        const double mean_msq = std::accumulate(msq.begin(), msq.end(), 0.0) / static_cast<double>(n_trials);
        row.converged = static_cast<std::size_t>(std::count(conv.begin(), conv.end(), 1));
        row.rmse = std::sqrt(mean_msq);
        if (n_trials > 1 && row.rmse > 0.0) {
            double ss = 0.0;
            for (double v : msq) ss += (v - mean_msq) * (v - mean_msq);
            const double se_msq = std::sqrt(ss / static_cast<double>(n_trials - 1) / static_cast<double>(n_trials));
            row.rmse_se = se_msq / (2.0 * row.rmse);
        }
        // A single trial has no spread to judge against.
        if (n_trials < 2) row.rmse_se = std::numeric_limits<double>::quiet_NaN();
        row.violates = n_trials > 1 && row.rmse < row.sqrt_bound - options.z * row.rmse_se;
        study.rows.push_back(row);
    }
    return study;
}

void emit_efficiency_csv(const std::vector<EfficiencyRow>& rows, std::ostream& out) {
    out << "sigma_rel,sigma,rmse,rmse_se,sqrt_crlb,ratio,trials,converged,violates\n";
    for (const auto& r : rows) {
        out << format_number(r.sigma_rel) << ',' << format_number(r.sigma) << ',' << format_number(r.rmse) << ','
            << format_number(r.rmse_se) << ',' << format_number(r.sqrt_bound) << ',' << format_number(r.ratio())
            << ',' << r.trials << ',' << r.converged << ',' << (r.violates ? "true" : "false") << '\n';
    }
}

}  // namespace micrlb
