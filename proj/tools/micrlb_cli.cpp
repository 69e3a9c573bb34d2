// micrlb: command-line front end.
//
//   micrlb generate <config> [--seed S] [--out FILE]
//   micrlb crlb <scene file> [--fim-mode M] [--compare-modes] ...
//   micrlb sweep <config> [--trials N] [--csv FILE] [--plot FILE]
//   micrlb efficiency <config> [--trials N] [--out FILE]
//   micrlb config --defaults
//
// Exit codes: 0 success, 1 usage or configuration error, 2 computation failure.

#include "micrlb/config.hpp"
#include "micrlb/crlb.hpp"
#include "micrlb/experiments.hpp"
#include "micrlb/interchange.hpp"
#include "micrlb/parallel.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>

using namespace micrlb;

namespace {

constexpr int kUsageError = 1;
constexpr int kComputeError = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt9(double v) { return format_number(v); }

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

void print_report(std::ostream& out, const CrlbReport& r, const MeasurementGraph& graph) {
    out << "mode=" << to_string(r.mode) << '\n';
    out << "things=" << graph.unknown_count() << '\n';
    out << "edges=" << graph.edges().size() << '\n';
    out << "condition_number=" << fmt9(r.condition_number) << '\n';
    out << "singular=" << (r.singular ? "true" : "false") << '\n';
    out << "indefinite=" << (r.indefinite ? "true" : "false") << '\n';
    out << "pseudo_inverse=" << (r.pseudo_inverse ? "true" : "false") << '\n';
    out << "aggregate_bound=" << fmt9(r.aggregate_bound) << '\n';
    out << "block_inverse_bound=" << fmt9(r.paper_formula_bound) << '\n';
    for (std::size_t i = 0; i < r.per_node_bound.size(); ++i) {
        out << "node " << graph.node_of_unknown(i) << " bound="<< fmt9(r.per_node_bound[i]) << '\n';
    }
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
    if (m.rows() == 0) return 0.0;
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

long negative_diagonal(const Eigen::MatrixXd& m) { return (m.diagonal().array() < 0.0).count(); }

void print_comparison(std::ostream& out, const FimMatrix& standard, const FimMatrix& paper,
                      const CrlbOptions& options) {
    const CrlbReport rs = crlb_standard(standard, options);
    const CrlbReport rp = crlb_standard(paper, options);
    const auto block_bound = [&](const FimMatrix& f) {
        try {
            return fmt9(crlb_paper(f, options.cond_threshold));
        } catch (const SingularBlockError& e) {
            return std::string("singular(") + e.block() + ")";
        }
    };
    const double norm = standard.entries.norm();
    out << "\n# standard vs paper discrepancy\n";
    out << "quantity,standard,paper\n";
    out << "trace_of_inverse_bound," << (rs.singular ? "singular" : fmt9(rs.aggregate_bound)) << ','
        << (rp.singular ? (rp.indefinite ? "indefinite" : "singular") : fmt9(rp.aggregate_bound)) << '\n';
    out << "block_inverse_bound," << block_bound(standard) << ',' << block_bound(paper) << '\n';
    out << "min_eigenvalue," << fmt9(min_eigenvalue(standard.entries)) << ',' << fmt9(min_eigenvalue(paper.entries))
        << '\n';
    out << "negative_diagonal_entries," << negative_diagonal(standard.entries) << ','
        << negative_diagonal(paper.entries) << '\n';
    out << "frobenius_norm," << fmt9(norm) << ',' << fmt9(paper.entries.norm()) << '\n';
    out << "relative_frobenius_difference,0,"
        << fmt9(norm > 0.0 ? (paper.entries - standard.entries).norm() / norm : 0.0) << '\n';
}

void dump_matrix(const std::string& path, const Eigen::MatrixXd& m) {
    auto out = open_out(path);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? " " : "") << fmt9(m(r, c));
        out << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cramer-Rao bounds for magnetic-induction underground localization"};
    app.require_subcommand(1);
    unsigned threads = 0;
    app.add_option("--threads", threads, "Worker thread cap (also MICRLB_THREADS)")->check(CLI::PositiveNumber);

    // generate
    auto* gen = app.add_subcommand("generate", "Generate a deployment and measurement graph");
    std::string gen_config;
    std::optional<std::uint64_t> gen_seed;
    std::string gen_out;
    gen->add_option("config", gen_config, "Config file")->required();
    gen->add_option("--seed", gen_seed, "Deployment seed (default: scenario.seed)");
    gen->add_option("--out", gen_out, "Output file (default: output.deployment)");

    // crlb
    auto* crlb = app.add_subcommand("crlb", "Compute the bound for a scene file");
    std::string crlb_file;
    std::string mode_name = "standard";
    bool compare = false;
    std::size_t samples = 100000;
    std::uint64_t oracle_seed = 1;
    double step_rel = 1e-4;
    double cond_threshold = 1e12;
    bool pinv = false;
    std::string dump_fim;
    std::string report_csv;
    crlb->add_option("scene", crlb_file, "Scene file written by 'generate'")->required();
    crlb->add_option("--fim-mode", mode_name, "standard | paper | oracle-mc | oracle-fd");
    crlb->add_flag("--compare-modes", compare, "Also print the standard-vs-paper discrepancy table");
    crlb->add_option("--samples", samples, "Samples for the oracle modes");
    crlb->add_option("--seed", oracle_seed, "Seed for the oracle modes");
    crlb->add_option("--step", step_rel, "Finite-difference step relative to the scene diameter");
    crlb->add_option("--cond-threshold", cond_threshold, "Condition number above which the FIM is singular");
    crlb->add_flag("--pinv", pinv, "Use a pseudo-inverse when the FIM is singular");
    crlb->add_option("--dump-fim", dump_fim, "Write the FIM as a dense whitespace-separated matrix");
    crlb->add_option("--csv", report_csv, "Write per-node bounds as CSV");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep");
    std::string sweep_config;
    std::optional<std::size_t> sweep_trials;
    std::string sweep_csv, sweep_plot;
    bool allow_oor = false;
    sweep->add_option("config", sweep_config, "Config file")->required();
    sweep->add_option("--trials", sweep_trials, "Trials per point (default: sweep.trials)");
    sweep->add_option("--csv", sweep_csv, "CSV output (default: output.csv)");
    sweep->add_option("--plot", sweep_plot, "Plot data output (default: output.plot)");
    sweep->add_flag("--allow-out-of-range", allow_oor, "Accept values outside the physical ranges");

    // efficiency
    auto* eff = app.add_subcommand("efficiency", "Compare estimator RMSE against the bound");
    std::string eff_config;
    std::optional<std::size_t> eff_trials;
    std::string eff_out;
    eff->add_option("config", eff_config, "Config file")->required();
    eff->add_option("--trials", eff_trials, "Trials per noise level (default: estimator.trials)");
    eff->add_option("--out", eff_out, "CSV output (default: output.efficiency)");

    // config
    auto* cfg = app.add_subcommand("config", "Configuration utilities");
    bool defaults = false;
    cfg->add_flag("--defaults", defaults, "Print every key with its default value");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsageError;
    }
    if (threads > 0) set_thread_count(threads);

    try {
        if (*cfg) {
            if (!defaults) throw UsageError("config: nothing to do (try --defaults)");
            std::cout << render_config(RunConfig{});
            return 0;
        }
        if (*gen) {
            const RunConfig rc = load_config(gen_config);
            const std::uint64_t seed = gen_seed.value_or(rc.scenario_seed);
            const Deployment dep = generate_deployment(rc.scenario.layout, seed);
            const MeasurementGraph graph = build_measurement_graph(dep, rc.scenario.layout, rc.scenario.budget);
            const std::string out = gen_out.empty() ? rc.output.deployment : gen_out;
            save_scene(out, dep, graph);
            const auto lonely = graph.unobserved_things();
            if (!lonely.empty()) {
                std::cerr << "warning: " << lonely.size() << " thing(s) have no links; the FIM will be singular\n";
            }
            std::cout << "wrote " << out << " (" << dep.anchors.size() << " anchors, " << dep.things.size()
                      << " things, " << graph.edges().size() << " edges)\n";
            return 0;
        }
        if (*crlb) {
            FimMode mode;
            try {
                mode = fim_mode_from_string(mode_name);
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            if (!std::ifstream(crlb_file)) throw UsageError("cannot read " + crlb_file);
            Scene scene;
            try {
                scene = load_scene(crlb_file);
            } catch (const FormatError& e) {
                throw UsageError(crlb_file + ": " + e.what());
            }
            const auto lonely = scene.graph.unobserved_things();
            if (!lonely.empty()) {
                std::cerr << "warning: " << lonely.size() << " thing(s) have no links; the FIM will be singular\n";
            }
            const Positions pos = scene.deployment.all_positions();
            FimMatrix fim;
            switch (mode) {
                case FimMode::Standard: fim = fim_standard(scene.graph, pos); break;
                case FimMode::Paper: fim = fim_paper(scene.graph, pos); break;
                case FimMode::OracleMc: fim = fim_oracle_mc(scene.graph, pos, samples, oracle_seed); break;
                case FimMode::OracleFd:
                    fim = fim_oracle_fd(scene.graph, pos, samples, step_rel * scene_diameter(pos), oracle_seed);
                    break;
            }
            CrlbOptions options{cond_threshold, pinv};
            const CrlbReport report = crlb_standard(fim, options);
            print_report(std::cout, report, scene.graph);
            if (compare) print_comparison(std::cout, fim_standard(scene.graph, pos), fim_paper(scene.graph, pos), options);
            if (!dump_fim.empty()) dump_matrix(dump_fim, fim.entries);
            if (!report_csv.empty()) {
                auto out = open_out(report_csv);
                out << "node,bound\n";
                for (std::size_t i = 0; i < report.per_node_bound.size(); ++i) {
                    out << scene.graph.node_of_unknown(i) << ',' << fmt9(report.per_node_bound[i]) << '\n';
                }
                out << "aggregate," << fmt9(report.aggregate_bound) << '\n';
            }
            return 0;
        }
        if (*sweep) {
            RunConfig rc = load_config(sweep_config);
            if (sweep_trials) rc.sweep.trials = *sweep_trials;
            if (allow_oor) rc.sweep.allow_out_of_range = true;
            SweepConfig sc = rc.sweep_config();
            try {
                sc.validate();
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            const SweepResult result = run_sweep(sc);
            const auto csvs = emit_csv(result, sweep_csv.empty() ? rc.output.csv : sweep_csv);
            const std::string svg = emit_plotdata(result, sweep_plot.empty() ? rc.output.plot : sweep_plot);
            for (const auto& s : result.series) {
                std::cout << "# " << (s.label.empty() ? to_string(result.param) : s.label) << '\n';
                emit_csv(s.rows, std::cout);
            }
            for (const auto& p : csvs) std::cout << "wrote " << p << '\n';
            std::cout << "wrote " << svg << '\n';
            return 0;
        }
        if (*eff) {
            RunConfig rc = load_config(eff_config);
            const std::size_t trials = eff_trials.value_or(rc.estimator.trials);
            const EfficiencyStudy study =
                efficiency_study(rc.scenario, trials, rc.estimator.seed, rc.efficiency_options());
            emit_efficiency_csv(study.rows, std::cout);
            const std::string out = eff_out.empty() ? rc.output.efficiency : eff_out;
            {
                auto file = open_out(out);
                emit_efficiency_csv(study.rows, file);
            }
            std::cout << "wrote " << out << '\n';
            bool violated = false;
            for (const auto& r : study.rows) violated = violated || r.violates;
            if (violated) {
                std::cerr << "error: empirical RMSE fell below the bound beyond tolerance\n";
                return kComputeError;
            }
            return 0;
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsageError;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kComputeError;
    }
    return kUsageError;
}
