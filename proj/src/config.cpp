#include "micrlb/config.hpp"

#include "micrlb/interchange.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <set>
#include <sstream>

namespace micrlb {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(s);
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_double(const std::string& v) {
    if (v == "inf") return std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("not a number: '" + v + "'");
    return d;
}

long long to_integer(const std::string& v) {
    std::size_t used = 0;
    const long long n = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument("not an integer: '" + v + "'");
    return n;
}

std::uint64_t to_u64(const std::string& v) {
    std::size_t used = 0;
    const unsigned long long n = std::stoull(v, &used);
    if (used != v.size() || v.front() == '-') throw std::invalid_argument("not a non-negative integer: '" + v + "'");
    return n;
}

bool to_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("not a boolean: '" + v + "'");
}

std::vector<double> to_list(const std::string& v) {
    std::vector<double> out;
    for (const auto& item : split(v, ',')) out.push_back(to_double(item));
    return out;
}

std::string num(double v) { return fmt::format("{}", v); }

std::string list(const std::vector<double>& vs) {
    std::string out;
    for (std::size_t i = 0; i < vs.size(); ++i) out += (i ? ", " : "") + num(vs[i]);
    return out;
}

Positions to_points(const std::string& v) {
    Positions out;
    for (const auto& item : split(v, ';')) {
        std::istringstream ss(item);
        double x, y, z;
        std::string extra;
        if (!(ss >> x >> y >> z) || (ss >> extra)) throw std::invalid_argument("expected 'x y z' triples");
        out.emplace_back(x, y, z);
    }
    return out;
}

std::string points(const Positions& ps) {
    std::string out;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        out += fmt::format("{}{} {} {}", i ? "; " : "", num(ps[i].x()), num(ps[i].y()), num(ps[i].z()));
    }
    return out;
}

std::vector<AlphaOverride> to_alpha(const std::string& v) {
    std::vector<AlphaOverride> out;
    for (const auto& item : split(v, ';')) {
        std::istringstream ss(item);
        AlphaOverride o;
        std::string extra;
        if (!(ss >> o.a >> o.b >> o.angle) || (ss >> extra)) throw std::invalid_argument("expected 'a b angle' triples");
        out.push_back(o);
    }
    return out;
}

std::string alphas(const std::vector<AlphaOverride>& os) {
    std::string out;
    for (std::size_t i = 0; i < os.size(); ++i) out += fmt::format("{}{} {} {}", i ? "; " : "", os[i].a, os[i].b, num(os[i].angle));
    return out;
}

struct Key {
    std::string name;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

#define MICRLB_NUM(key, field) \
    Key{key, [](RunConfig& c, const std::string& v) { c.field = to_double(v); }, [](const RunConfig& c) { return num(c.field); }}
#define MICRLB_INT(key, field, type)                                                       \
    Key{key, [](RunConfig& c, const std::string& v) { c.field = static_cast<type>(to_integer(v)); }, \
        [](const RunConfig& c) { return std::to_string(c.field); }}
#define MICRLB_U64(key, field) \
    Key{key, [](RunConfig& c, const std::string& v) { c.field = to_u64(v); }, [](const RunConfig& c) { return std::to_string(c.field); }}
#define MICRLB_STR(key, field) \
    Key{key, [](RunConfig& c, const std::string& v) { c.field = v; }, [](const RunConfig& c) { return c.field; }}

const std::vector<Key>& keys() {
    static const std::vector<Key> table = {
        MICRLB_NUM("scenario.fracture_width", scenario.layout.fracture_width),
        MICRLB_NUM("scenario.fracture_length", scenario.layout.fracture_length),
        MICRLB_NUM("scenario.fracture_thickness", scenario.layout.fracture_thickness),
        MICRLB_NUM("scenario.depth", scenario.layout.depth),
        MICRLB_INT("scenario.anchor_count", scenario.layout.anchor_count, int),
        Key{"scenario.anchor_placement",
            [](RunConfig& c, const std::string& v) { c.scenario.layout.anchor_placement = anchor_placement_from_string(v); },
            [](const RunConfig& c) { return to_string(c.scenario.layout.anchor_placement); }},
        Key{"scenario.anchor_positions",
            [](RunConfig& c, const std::string& v) { c.scenario.layout.anchor_positions = to_points(v); },
            [](const RunConfig& c) { return points(c.scenario.layout.anchor_positions); }},
        MICRLB_NUM("scenario.well_offset", scenario.layout.well_offset),
        MICRLB_NUM("scenario.well_span", scenario.layout.well_span),
        MICRLB_INT("scenario.thing_count", scenario.layout.thing_count, int),
        MICRLB_NUM("scenario.comm_range_anchor", scenario.layout.comm_range_anchor),
        MICRLB_NUM("scenario.comm_range_peer", scenario.layout.comm_range_peer),
        Key{"scenario.link_mode",
            [](RunConfig& c, const std::string& v) { c.scenario.layout.link_mode = link_mode_from_string(v); },
            [](const RunConfig& c) { return to_string(c.scenario.layout.link_mode); }},
        MICRLB_NUM("scenario.min_separation", scenario.layout.min_separation),
        MICRLB_NUM("scenario.temperature", scenario.layout.temperature),
        MICRLB_U64("scenario.seed", scenario_seed),

        MICRLB_NUM("channel.frequency", scenario.budget.channel.frequency),
        MICRLB_NUM("channel.permeability", scenario.budget.channel.permeability),
        MICRLB_NUM("channel.unit_length_resistance", scenario.budget.channel.unit_length_resistance),
        MICRLB_NUM("channel.transmit_power", scenario.budget.channel.transmit_power),
        MICRLB_NUM("channel.misalignment_angle", scenario.budget.channel.misalignment_angle),
        Key{"channel.path_loss_exponent",
            [](RunConfig& c, const std::string& v) {
                c.scenario.budget.channel.path_loss_exponent = path_loss_from_int(static_cast<int>(to_integer(v)));
            },
            [](const RunConfig& c) { return std::to_string(order(c.scenario.budget.channel.path_loss_exponent)); }},
        Key{"channel.alpha_overrides",
            [](RunConfig& c, const std::string& v) { c.scenario.budget.alpha_overrides = to_alpha(v); },
            [](const RunConfig& c) { return alphas(c.scenario.budget.alpha_overrides); }},

        MICRLB_INT("coils.anchor_turns", scenario.budget.anchor_coil.turns, int),
        MICRLB_NUM("coils.anchor_radius", scenario.budget.anchor_coil.radius),
        MICRLB_INT("coils.thing_turns", scenario.budget.thing_coil.turns, int),
        MICRLB_NUM("coils.thing_radius", scenario.budget.thing_coil.radius),

        Key{"noise.mode",
            [](RunConfig& c, const std::string& v) { c.scenario.budget.noise.mode = noise_mode_from_string(v); },
            [](const RunConfig& c) { return to_string(c.scenario.budget.noise.mode); }},
        MICRLB_NUM("noise.sigma", scenario.budget.noise.sigma),
        MICRLB_NUM("noise.unit", scenario.budget.noise.unit),

        Key{"sweep.param", [](RunConfig& c, const std::string& v) { c.sweep.param = sweep_param_from_string(v); },
            [](const RunConfig& c) { return to_string(c.sweep.param); }},
        Key{"sweep.values", [](RunConfig& c, const std::string& v) { c.sweep.values = to_list(v); },
            [](const RunConfig& c) { return list(c.sweep.values); }},
        Key{"sweep.series_param",
            [](RunConfig& c, const std::string& v) {
                c.sweep.series_param = v.empty() || v == "none" ? std::nullopt
                                                                : std::optional(sweep_param_from_string(v));
            },
            [](const RunConfig& c) { return c.sweep.series_param ? to_string(*c.sweep.series_param) : "none"; }},
        Key{"sweep.series_values", [](RunConfig& c, const std::string& v) { c.sweep.series_values = to_list(v); },
            [](const RunConfig& c) { return list(c.sweep.series_values); }},
        MICRLB_INT("sweep.trials", sweep.trials, std::size_t),
        MICRLB_U64("sweep.seed", sweep.seed),
        Key{"sweep.fim_mode", [](RunConfig& c, const std::string& v) { c.sweep.fim_mode = fim_mode_from_string(v); },
            [](const RunConfig& c) { return to_string(c.sweep.fim_mode); }},
        Key{"sweep.allow_out_of_range", [](RunConfig& c, const std::string& v) { c.sweep.allow_out_of_range = to_bool(v); },
            [](const RunConfig& c) { return std::string(c.sweep.allow_out_of_range ? "true" : "false"); }},
        MICRLB_INT("sweep.oracle_samples", sweep.oracle_samples, std::size_t),
        MICRLB_NUM("sweep.cond_threshold", sweep.cond_threshold),

        MICRLB_INT("estimator.trials", estimator.trials, std::size_t),
        MICRLB_U64("estimator.seed", estimator.seed),
        Key{"estimator.sigma_values", [](RunConfig& c, const std::string& v) { c.estimator.sigma_values = to_list(v); },
            [](const RunConfig& c) { return list(c.estimator.sigma_values); }},
        MICRLB_INT("estimator.max_iterations", estimator.max_iterations, int),
        MICRLB_NUM("estimator.z", estimator.z),

        MICRLB_STR("output.deployment", output.deployment),
        MICRLB_STR("output.csv", output.csv),
        MICRLB_STR("output.plot", output.plot),
        MICRLB_STR("output.efficiency", output.efficiency),
    };
    return table;
}

#undef MICRLB_NUM
#undef MICRLB_INT
#undef MICRLB_U64
#undef MICRLB_STR

}  // namespace

ConfigError::ConfigError(std::string key, std::size_t line, const std::string& what)
    : std::runtime_error(line ? fmt::format("line {}: {}", line, what) : what), key_(std::move(key)), line_(line) {}

SweepConfig RunConfig::sweep_config() const {
    SweepConfig s;
    s.base = scenario;
    s.param = sweep.param;
    s.values = sweep.values;
    s.series_param = sweep.series_param;
    s.series_values = sweep.series_values;
    s.trials = sweep.trials;
    s.seed = sweep.seed;
    s.mc.mode = sweep.fim_mode;
    s.mc.oracle_samples = sweep.oracle_samples;
    s.mc.crlb.cond_threshold = sweep.cond_threshold;
    s.allow_out_of_range = sweep.allow_out_of_range;
    return s;
}

EfficiencyOptions RunConfig::efficiency_options() const {
    EfficiencyOptions o;
    o.sigma_rel = estimator.sigma_values;
    o.estimator.max_iterations = estimator.max_iterations;
    o.z = estimator.z;
    return o;
}

RunConfig parse_config(std::istream& in) {
    RunConfig cfg;
    std::set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError("", lineno, "expected 'section.key = value', got '" + t + "'");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        const auto& table = keys();
        const auto it = std::find_if(table.begin(), table.end(), [&](const Key& k) { return k.name == key; });
        if (it == table.end()) throw ConfigError(key, lineno, "unknown key '" + key + "'");
        if (!seen.insert(key).second) throw ConfigError(key, lineno, "duplicate key '" + key + "'");
        try {
            it->set(cfg, value);
        } catch (const std::exception& e) {
            throw ConfigError(key, lineno, "bad value for '" + key + "': " + e.what());
        }
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", 0, "cannot read config file " + path);
    return parse_config(in);
}

std::string render_config(const RunConfig& cfg) {
    std::string out;
    std::string section;
    for (const auto& k : keys()) {
        const std::string s = k.name.substr(0, k.name.find('.'));
        if (s != section) {
            if (!section.empty()) out += '\n';
            out += "# [" + s + "]\n";
            section = s;
        }
        out += k.name + " = " + k.get(cfg) + '\n';
    }
    return out;
}

std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const auto& k : keys()) out.push_back(k.name);
    return out;
}

}  // namespace micrlb
