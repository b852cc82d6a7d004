// config.hpp — Experiment configuration: a small TOML subset (sections,
// key = value, numbers, strings, booleans, single-line number arrays) plus
// the typed ExperimentConfig it maps onto. Emission uses shortest
// round-tripping number formatting, so parse(emit(cfg)) == cfg exactly.

#pragma once

#include "dynamics.hpp"
#include "optomech.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace qsync::config {

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --------------------------- TOML subset ---------------------------------------

struct TomlValue {
    enum class Kind { boolean, integer, floating, string, number_array };
    Kind kind = Kind::integer;
    bool b = false;
    long long i = 0;
    double f = 0.0;
    std::string s;
    std::vector<double> arr;

    double as_number(const std::string& key) const {
        if (kind == Kind::integer) return static_cast<double>(i);
        if (kind == Kind::floating) return f;
        throw config_error("config: key '" + key + "' must be a number");
    }
    long long as_int(const std::string& key) const {
        if (kind != Kind::integer) throw config_error("config: key '" + key + "' must be an integer");
        return i;
    }
    const std::string& as_string(const std::string& key) const {
        if (kind != Kind::string) throw config_error("config: key '" + key + "' must be a string");
        return s;
    }
    std::vector<double> as_number_array(const std::string& key) const {
        if (kind == Kind::number_array) return arr;
        if (kind == Kind::integer || kind == Kind::floating) return {as_number(key)};
        throw config_error("config: key '" + key + "' must be a number or an array of numbers");
    }
};

using TomlSection = std::map<std::string, TomlValue>;
using TomlTable = std::map<std::string, TomlSection>;  // "" holds top-level keys

namespace detail {

inline std::string_view trim(std::string_view sv) {
    while (!sv.empty() && std::isspace(static_cast<unsigned char>(sv.front()))) sv.remove_prefix(1);
    while (!sv.empty() && std::isspace(static_cast<unsigned char>(sv.back()))) sv.remove_suffix(1);
    return sv;
}

inline std::string_view strip_comment(std::string_view line) {
    bool in_string = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
        if (line[k] == '"') in_string = !in_string;
        if (line[k] == '#' && !in_string) return line.substr(0, k);
    }
    return line;
}

inline TomlValue parse_value(std::string_view text, int lineno) {
    text = trim(text);
    const std::string where = " (line " + std::to_string(lineno) + ")";
    if (text.empty()) throw config_error("config: missing value" + where);
    TomlValue v;
    if (text == "true" || text == "false") {
        v.kind = TomlValue::Kind::boolean;
        v.b = (text == "true");
        return v;
    }
    if (text.front() == '"') {
        if (text.size() < 2 || text.back() != '"') throw config_error("config: unterminated string" + where);
        v.kind = TomlValue::Kind::string;
        std::string_view body = text.substr(1, text.size() - 2);
        for (std::size_t k = 0; k < body.size(); ++k) {
            if (body[k] == '\\' && k + 1 < body.size()) {
                ++k;
                v.s += body[k];
            } else {
                v.s += body[k];
            }
        }
        return v;
    }
    if (text.front() == '[') {
        if (text.back() != ']') throw config_error("config: unterminated array" + where);
        v.kind = TomlValue::Kind::number_array;
        std::string_view body = trim(text.substr(1, text.size() - 2));
        while (!body.empty()) {
            const std::size_t comma = body.find(',');
            std::string_view item = trim(comma == std::string_view::npos ? body : body.substr(0, comma));
            if (item.empty()) throw config_error("config: empty array element" + where);
            char* end = nullptr;
            const std::string item_str(item);
            const double x = std::strtod(item_str.c_str(), &end);
            if (end != item_str.c_str() + item_str.size()) {
                throw config_error("config: bad array element '" + item_str + "'" + where);
            }
            v.arr.push_back(x);
            if (comma == std::string_view::npos) break;
            body = trim(body.substr(comma + 1));
        }
        return v;
    }
    // number: integer when it parses fully without '.', 'e', 'inf', 'nan'
    const std::string text_str(text);
    const bool looks_integral = text.find_first_of(".eEinfa") == std::string_view::npos;
    if (looks_integral) {
        char* end = nullptr;
        const long long i = std::strtoll(text_str.c_str(), &end, 10);
        if (end == text_str.c_str() + text_str.size()) {
            v.kind = TomlValue::Kind::integer;
            v.i = i;
            return v;
        }
    }
    char* end = nullptr;
    const double f = std::strtod(text_str.c_str(), &end);
    if (end != text_str.c_str() + text_str.size()) {
        throw config_error("config: cannot parse value '" + text_str + "'" + where);
    }
    v.kind = TomlValue::Kind::floating;
    v.f = f;
    return v;
}

}  // namespace detail

inline TomlTable parse_toml(std::string_view text) {
    TomlTable table;
    std::string section;
    int lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
        ++lineno;
        line = detail::trim(detail::strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw config_error("config: malformed section header (line " + std::to_string(lineno) + ")");
            }
            section = std::string(detail::trim(line.substr(1, line.size() - 2)));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw config_error("config: expected key = value (line " + std::to_string(lineno) + ")");
        }
        const std::string key(detail::trim(line.substr(0, eq)));
        if (key.empty()) throw config_error("config: empty key (line " + std::to_string(lineno) + ")");
        if (table[section].count(key)) {
            throw config_error("config: duplicate key '" + key + "' (line " + std::to_string(lineno) + ")");
        }
        table[section][key] = detail::parse_value(line.substr(eq + 1), lineno);
    }
    return table;
}

// --------------------------- Number formatting ---------------------------------

// Shortest decimal form that parses back to the same double.
inline std::string format_double(double x) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x) break;
    }
    return buf;
}

inline std::string format_array(const std::vector<double>& xs) {
    std::string out = "[";
    for (std::size_t k = 0; k < xs.size(); ++k) {
        if (k) out += ", ";
        out += format_double(xs[k]);
    }
    out += "]";
    return out;
}

// --------------------------- Experiment configuration --------------------------

struct SweepConfig {
    std::vector<double> mu_values;
    std::vector<double> nb_values;
    int chain_sites = 20;
    int h_max = 0;  // 0 -> chain_sites / 2

    static SweepConfig defaults() {
        SweepConfig s;
        for (int k = 0; k <= 20; ++k) s.mu_values.push_back(k * 0.002);
        s.nb_values = {0.0, 1.0, 2.0, 5.0, 10.0, 20.0};
        return s;
    }

    bool operator==(const SweepConfig&) const = default;
};

struct OuCheckConfig {
    double gamma_eff = 0.01;
    double mu = 0.02;
    double d = 0.001;
    double dt = 0.01;
    double t_max = 4000.0;
    double tol = 1e-8;

    bool operator==(const OuCheckConfig&) const = default;
};

struct ExperimentConfig {
    std::string experiment = "pair-trace";
    SystemParams params = SystemParams::default_pair();
    IntegratorConfig integrator;
    SweepConfig sweep = SweepConfig::defaults();
    OuCheckConfig ou;
    std::string out_path;  // CLI-side only; not serialized

    bool operator==(const ExperimentConfig& o) const {
        return experiment == o.experiment && params_equal(params, o.params) &&
               integrator == o.integrator && sweep == o.sweep && ou == o.ou;
    }

    static bool params_equal(const SystemParams& a, const SystemParams& b) {
        return a.topology == b.topology && a.n_sites == b.n_sites &&
               a.omega.size() == b.omega.size() && (a.omega.array() == b.omega.array()).all() &&
               a.delta.size() == b.delta.size() && (a.delta.array() == b.delta.array()).all() &&
               a.kappa == b.kappa && a.gamma == b.gamma && a.g == b.g && a.E == b.E &&
               a.mu == b.mu && a.n_b == b.n_b;
    }
};

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {"pair-trace", "sweep-mu", "sweep-nb", "chain",
                                                   "ou-check"};
    return names;
}

// Per-experiment defaults; the chain shortens the transient/recording windows
// to keep the 80x80 propagation at desk scale (documented accuracy trade).
inline ExperimentConfig default_config(const std::string& experiment) {
    bool known = false;
    for (const auto& name : experiment_names()) known = known || (name == experiment);
    if (!known) throw config_error("config: unknown experiment '" + experiment + "'");
    ExperimentConfig cfg;
    cfg.experiment = experiment;
    if (experiment == "chain") {
        cfg.integrator.transient_tau = 300.0;
        cfg.integrator.record_tau = 200.0;
    }
    return cfg;
}

// --------------------------- Key application -----------------------------------

namespace detail {

inline Eigen::VectorXd as_site_vector(const TomlValue& v, int n_sites, const std::string& key) {
    const std::vector<double> xs = v.as_number_array(key);
    if (xs.size() == 1) return Eigen::VectorXd::Constant(n_sites, xs[0]);
    if (static_cast<int>(xs.size()) != n_sites) {
        throw config_error("config: '" + key + "' must have 1 or n_sites entries");
    }
    Eigen::VectorXd out(n_sites);
    for (int k = 0; k < n_sites; ++k) out(k) = xs[k];
    return out;
}

inline void apply_params_kv(SystemParams& p, const std::string& key, const TomlValue& v) {
    if (key == "topology") {
        const std::string& s = v.as_string(key);
        if (s == "pair") p.topology = Topology::pair;
        else if (s == "ring") p.topology = Topology::ring;
        else throw config_error("config: topology must be \"pair\" or \"ring\"");
    } else if (key == "n_sites") {
        const int n = static_cast<int>(v.as_int(key));
        if (n < 1) throw config_error("config: n_sites must be >= 1");
        p.n_sites = n;
        if (p.omega.size() != n) p.omega = Eigen::VectorXd::Constant(n, p.omega.size() ? p.omega(0) : 1.0);
        if (p.delta.size() != n) p.delta = Eigen::VectorXd::Constant(n, p.delta.size() ? p.delta(0) : 1.0);
    } else if (key == "omega") {
        p.omega = as_site_vector(v, p.n_sites, key);
        p.delta = p.omega;  // blue-drive default Δ_j = ω_j; override with an explicit delta
    } else if (key == "delta") {
        p.delta = as_site_vector(v, p.n_sites, key);
    } else if (key == "kappa") {
        p.kappa = v.as_number(key);
    } else if (key == "gamma") {
        p.gamma = v.as_number(key);
    } else if (key == "g") {
        p.g = v.as_number(key);
    } else if (key == "E") {
        p.E = v.as_number(key);
    } else if (key == "mu") {
        p.mu = v.as_number(key);
    } else if (key == "n_b") {
        p.n_b = v.as_number(key);
    } else {
        throw config_error("config: unknown key 'params." + key + "'");
    }
}

inline void apply_integrator_kv(IntegratorConfig& c, const std::string& key, const TomlValue& v) {
    if (key == "steps_per_tau") c.steps_per_tau = static_cast<int>(v.as_int(key));
    else if (key == "transient_tau") c.transient_tau = v.as_number(key);
    else if (key == "record_tau") c.record_tau = v.as_number(key);
    else if (key == "samples_per_tau") c.samples_per_tau = static_cast<int>(v.as_int(key));
    else if (key == "amplitude_floor") c.amplitude_floor = v.as_number(key);
    else if (key == "physicality_tol") c.physicality_tol = v.as_number(key);
    else if (key == "limit_cycle_threshold") c.limit_cycle_threshold = v.as_number(key);
    else if (key == "bound_tol") c.bound_tol = v.as_number(key);
    else throw config_error("config: unknown key 'integrator." + key + "'");
}

inline void apply_sweep_kv(SweepConfig& s, const std::string& key, const TomlValue& v) {
    if (key == "mu_values") s.mu_values = v.as_number_array(key);
    else if (key == "nb_values") s.nb_values = v.as_number_array(key);
    else if (key == "chain_sites") s.chain_sites = static_cast<int>(v.as_int(key));
    else if (key == "h_max") s.h_max = static_cast<int>(v.as_int(key));
    else throw config_error("config: unknown key 'sweep." + key + "'");
}

inline void apply_ou_kv(OuCheckConfig& o, const std::string& key, const TomlValue& v) {
    if (key == "gamma_eff") o.gamma_eff = v.as_number(key);
    else if (key == "mu") o.mu = v.as_number(key);
    else if (key == "d") o.d = v.as_number(key);
    else if (key == "dt") o.dt = v.as_number(key);
    else if (key == "t_max") o.t_max = v.as_number(key);
    else if (key == "tol") o.tol = v.as_number(key);
    else throw config_error("config: unknown key 'ou." + key + "'");
}

inline void apply_section_kv(ExperimentConfig& cfg, const std::string& section, const std::string& key,
                             const TomlValue& v) {
    if (section.empty()) {
        if (key == "experiment") {
            const std::string& name = v.as_string(key);
            bool known = false;
            for (const auto& n : experiment_names()) known = known || (n == name);
            if (!known) throw config_error("config: unknown experiment '" + name + "'");
            cfg.experiment = name;
        } else {
            throw config_error("config: unknown top-level key '" + key + "'");
        }
    } else if (section == "params") {
        apply_params_kv(cfg.params, key, v);
    } else if (section == "integrator") {
        apply_integrator_kv(cfg.integrator, key, v);
    } else if (section == "sweep") {
        apply_sweep_kv(cfg.sweep, key, v);
    } else if (section == "ou") {
        apply_ou_kv(cfg.ou, key, v);
    } else {
        throw config_error("config: unknown section '[" + section + "]'");
    }
}

}  // namespace detail

// Parse TOML text over a base configuration. Keys within [params] apply in a
// fixed order (topology, n_sites, omega, delta, then rates) so that array
// lengths resolve independently of file ordering.
inline ExperimentConfig parse_config(std::string_view text, ExperimentConfig base) {
    const TomlTable table = parse_toml(text);
    static const std::vector<std::string> params_order = {"topology", "n_sites", "omega", "delta"};
    for (const auto& [section, kvs] : table) {
        if (section == "params") {
            for (const auto& key : params_order) {
                const auto it = kvs.find(key);
                if (it != kvs.end()) detail::apply_section_kv(base, section, key, it->second);
            }
            for (const auto& [key, value] : kvs) {
                bool ordered = false;
                for (const auto& k : params_order) ordered = ordered || (k == key);
                if (!ordered) detail::apply_section_kv(base, section, key, value);
            }
        } else {
            for (const auto& [key, value] : kvs) detail::apply_section_kv(base, section, key, value);
        }
    }
    return base;
}

// Single "section.key=value" override (the CLI --set flag); the value text
// uses the same grammar as file values.
inline void apply_override(ExperimentConfig& cfg, std::string_view assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string_view::npos) {
        throw config_error("config: --set expects key=value, got '" + std::string(assignment) + "'");
    }
    const std::string key_path(detail::trim(assignment.substr(0, eq)));
    const TomlValue value = detail::parse_value(assignment.substr(eq + 1), 0);
    const std::size_t dot = key_path.find('.');
    const std::string section = dot == std::string::npos ? "" : key_path.substr(0, dot);
    const std::string key = dot == std::string::npos ? key_path : key_path.substr(dot + 1);
    detail::apply_section_kv(cfg, section, key, value);
}

// Full resolved configuration as TOML; parse_config(emit_config(cfg)) == cfg.
inline std::string emit_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "experiment = \"" << cfg.experiment << "\"\n";
    out << "\n[params]\n";
    out << "topology = \"" << to_string(cfg.params.topology) << "\"\n";
    out << "n_sites = " << cfg.params.n_sites << "\n";
    const std::vector<double> omega(cfg.params.omega.data(), cfg.params.omega.data() + cfg.params.omega.size());
    const std::vector<double> delta(cfg.params.delta.data(), cfg.params.delta.data() + cfg.params.delta.size());
    out << "omega = " << format_array(omega) << "\n";
    out << "delta = " << format_array(delta) << "\n";
    out << "kappa = " << format_double(cfg.params.kappa) << "\n";
    out << "gamma = " << format_double(cfg.params.gamma) << "\n";
    out << "g = " << format_double(cfg.params.g) << "\n";
    out << "E = " << format_double(cfg.params.E) << "\n";
    out << "mu = " << format_double(cfg.params.mu) << "\n";
    out << "n_b = " << format_double(cfg.params.n_b) << "\n";
    out << "\n[integrator]\n";
    out << "steps_per_tau = " << cfg.integrator.steps_per_tau << "\n";
    out << "transient_tau = " << format_double(cfg.integrator.transient_tau) << "\n";
    out << "record_tau = " << format_double(cfg.integrator.record_tau) << "\n";
    out << "samples_per_tau = " << cfg.integrator.samples_per_tau << "\n";
    out << "amplitude_floor = " << format_double(cfg.integrator.amplitude_floor) << "\n";
    out << "physicality_tol = " << format_double(cfg.integrator.physicality_tol) << "\n";
    out << "limit_cycle_threshold = " << format_double(cfg.integrator.limit_cycle_threshold) << "\n";
    out << "bound_tol = " << format_double(cfg.integrator.bound_tol) << "\n";
    out << "\n[sweep]\n";
    out << "mu_values = " << format_array(cfg.sweep.mu_values) << "\n";
    out << "nb_values = " << format_array(cfg.sweep.nb_values) << "\n";
    out << "chain_sites = " << cfg.sweep.chain_sites << "\n";
    out << "h_max = " << cfg.sweep.h_max << "\n";
    out << "\n[ou]\n";
    out << "gamma_eff = " << format_double(cfg.ou.gamma_eff) << "\n";
    out << "mu = " << format_double(cfg.ou.mu) << "\n";
    out << "d = " << format_double(cfg.ou.d) << "\n";
    out << "dt = " << format_double(cfg.ou.dt) << "\n";
    out << "t_max = " << format_double(cfg.ou.t_max) << "\n";
    out << "tol = " << format_double(cfg.ou.tol) << "\n";
    return out.str();
}

}  // namespace qsync::config
