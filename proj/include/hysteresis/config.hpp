#pragma once

// Flat key = value run configuration.

#include "hysteresis/equilibrium.hpp"
#include "hysteresis/expr.hpp"
#include "hysteresis/integrator.hpp"
#include "hysteresis/loop.hpp"
#include "hysteresis/model.hpp"
#include "hysteresis/signal.hpp"
#include "hysteresis/verdict.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hysteresis {

/// Malformed or unknown configuration entry (exit code 1 in the CLI).
class ConfigError : public Error {
public:
    using Error::Error;
};

struct RunConfig {
    // model
    std::string preset;
    Overrides params;  // "param.<name>" keys
    std::string rhs;
    int order = 1;
    std::vector<double> init;
    std::string name = "custom";
    // signal
    std::optional<SignalKind> signal;
    double amplitude = 1.0;
    double omega = 1.0;
    double level = 0.0;
    double duration = 10.0;
    std::vector<double> omegas{2.0, 0.5, 0.1, 0.02};
    // integration
    IntegrationParams integration;
    int discard_periods = 2;
    // equilibria / bifurcations / diagram
    double U = 0.0;
    std::optional<double> search_lo, search_hi;
    int grid_n = 4000;
    std::optional<double> bif_u_lo, bif_u_hi, bif_x_lo, bif_x_hi;
    int seed_grid = 64;
    int diagram_n = 200;
    // loop analysis and verdict
    LoopOptions loop;
    VerdictThresholds thresholds;
    std::string loop_csv;
    // output
    std::string out = "out";
    bool svg = true;
    int workers = 0;

    /// Applies one entry; throws ConfigError for unknown keys or bad values.
    void set(const std::string& key, const std::string& value);

    /// Model selected by `preset` (with parameter overrides) or by `rhs`.
    [[nodiscard]] ModelSpec model() const;
    [[nodiscard]] SignalKind signal_kind(const ModelSpec& m) const { return signal.value_or(m.default_signal); }
    [[nodiscard]] Signal make_signal(const ModelSpec& m) const;
    [[nodiscard]] SweepParams sweep_params() const;
    [[nodiscard]] EquilibriumOptions equilibrium_options() const;
    [[nodiscard]] BifurcationOptions bifurcation_options() const;

    /// Every accepted key (parameter keys are written `param.<name>`).
    [[nodiscard]] static const std::vector<std::string>& keys();
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline double config_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const char* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end || !std::isfinite(out)) {
        throw ConfigError("config key '" + key + "': expected a finite number, got '" + v + "'");
    }
    return out;
}

inline int config_int(const std::string& key, const std::string& v) {
    int out = 0;
    const char* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end) throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
    return out;
}

inline bool config_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key '" + key + "': expected true or false, got '" + v + "'");
}

inline std::vector<double> config_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(config_double(key, trim(item)));
    if (out.empty()) throw ConfigError("config key '" + key + "': expected a comma-separated list");
    return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

inline const std::map<std::string, Setter>& config_setters() {
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        auto dbl = [&](const char* k, double RunConfig::*m) {
            t[k] = [m](RunConfig& c, const std::string& key, const std::string& v) { c.*m = config_double(key, v); };
        };
        auto opt = [&](const char* k, std::optional<double> RunConfig::*m) {
            t[k] = [m](RunConfig& c, const std::string& key, const std::string& v) { c.*m = config_double(key, v); };
        };
        auto integer = [&](const char* k, int RunConfig::*m) {
            t[k] = [m](RunConfig& c, const std::string& key, const std::string& v) { c.*m = config_int(key, v); };
        };
        auto str = [&](const char* k, std::string RunConfig::*m) {
            t[k] = [m](RunConfig& c, const std::string&, const std::string& v) { c.*m = v; };
        };

        str("preset", &RunConfig::preset);
        str("rhs", &RunConfig::rhs);
        str("name", &RunConfig::name);
        integer("order", &RunConfig::order);
        t["init"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.init = config_list(k, v); };

        t["signal"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            try {
                c.signal = parse_signal_kind(v);
            } catch (const Error& e) {
                throw ConfigError("config key '" + k + "': " + e.what());
            }
        };
        dbl("amplitude", &RunConfig::amplitude);
        dbl("omega", &RunConfig::omega);
        dbl("level", &RunConfig::level);
        dbl("duration", &RunConfig::duration);
        t["omegas"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.omegas = config_list(k, v); };

        t["periods"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.integration.periods = config_int(k, v);
        };
        t["steps_per_period"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.integration.steps_per_period = config_int(k, v);
        };
        t["split_at_kinks"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.integration.split_at_kinks = config_bool(k, v);
        };
        t["stability_substeps"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.integration.stability_substeps = config_bool(k, v);
        };
        t["max_substeps"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.integration.max_substeps = config_int(k, v);
        };
        t["divergence_limit"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.integration.divergence_limit = config_double(k, v);
        };
        integer("discard_periods", &RunConfig::discard_periods);

        dbl("U", &RunConfig::U);
        opt("search_lo", &RunConfig::search_lo);
        opt("search_hi", &RunConfig::search_hi);
        integer("grid_n", &RunConfig::grid_n);
        opt("bif_u_lo", &RunConfig::bif_u_lo);
        opt("bif_u_hi", &RunConfig::bif_u_hi);
        opt("bif_x_lo", &RunConfig::bif_x_lo);
        opt("bif_x_hi", &RunConfig::bif_x_hi);
        integer("seed_grid", &RunConfig::seed_grid);
        integer("diagram_n", &RunConfig::diagram_n);

        t["closure_threshold"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.loop.closure_threshold = config_double(k, v);
        };
        t["slope_threshold"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.loop.jumps.slope_threshold = config_double(k, v);
        };
        t["jump_height_fraction"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.loop.jumps.jump_height_fraction = config_double(k, v);
        };
        t["degenerate_fraction"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.thresholds.degenerate_fraction = config_double(k, v);
        };
        t["unbounded_exponent"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.thresholds.unbounded_exponent = config_double(k, v);
        };
        t["rate_threshold"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.thresholds.rate_threshold = config_double(k, v);
        };
        t["fit_points"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.thresholds.fit_points = config_int(k, v);
        };
        str("loop_csv", &RunConfig::loop_csv);

        str("out", &RunConfig::out);
        t["svg"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.svg = config_bool(k, v); };
        integer("workers", &RunConfig::workers);
        return t;
    }();
    return table;
}

}  // namespace detail

inline void RunConfig::set(const std::string& raw_key, const std::string& raw_value) {
    const std::string key = detail::trim(raw_key);
    const std::string value = detail::trim(raw_value);
    if (key.rfind("param.", 0) == 0) {
        const std::string p = key.substr(6);
        if (p.empty()) throw ConfigError("config key 'param.' needs a parameter name");
        params[p] = value;
        return;
    }
    const auto& table = detail::config_setters();
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(*this, key, value);
}

inline const std::vector<std::string>& RunConfig::keys() {
    static const std::vector<std::string> all = [] {
        std::vector<std::string> k;
        for (const auto& [name, setter] : detail::config_setters()) k.push_back(name);
        k.push_back("param.<name>");
        return k;
    }();
    return all;
}

inline ModelSpec RunConfig::model() const {
    if (!preset.empty() && !rhs.empty()) throw ConfigError("set either 'preset' or 'rhs', not both");
    if (!preset.empty()) return hysteresis::preset(preset, params);
    if (rhs.empty()) throw ConfigError("no model selected: set 'preset' or 'rhs'");
    if (!params.empty()) throw ConfigError("'param.*' keys apply only to presets");
    std::vector<double> x0 = init;
    if (x0.empty()) x0.assign(static_cast<std::size_t>(std::max(order, 1)), 0.0);
    return build_model(order, rhs, x0, name);
}

inline Signal RunConfig::make_signal(const ModelSpec& m) const {
    const SignalKind kind = signal_kind(m);
    Signal s = kind == SignalKind::constant ? Signal::constant(level, duration) : Signal{kind, amplitude, omega, 0.0, 0.0};
    s.validate();
    return s;
}

inline SweepParams RunConfig::sweep_params() const {
    SweepParams p;
    p.integration = integration;
    p.discard_periods = discard_periods;
    p.amplitude = amplitude;
    p.loop = loop;
    p.workers = workers;
    return p;
}

inline EquilibriumOptions RunConfig::equilibrium_options() const {
    EquilibriumOptions o;
    if (search_lo || search_hi) {
        if (!(search_lo && search_hi)) throw ConfigError("set both 'search_lo' and 'search_hi'");
        o.interval = Interval{*search_lo, *search_hi};
    }
    o.grid_n = grid_n;
    return o;
}

inline BifurcationOptions RunConfig::bifurcation_options() const {
    BifurcationOptions o;
    if (bif_u_lo || bif_u_hi) {
        if (!(bif_u_lo && bif_u_hi)) throw ConfigError("set both 'bif_u_lo' and 'bif_u_hi'");
        o.u_range = Interval{*bif_u_lo, *bif_u_hi};
    }
    if (bif_x_lo || bif_x_hi) {
        if (!(bif_x_lo && bif_x_hi)) throw ConfigError("set both 'bif_x_lo' and 'bif_x_hi'");
        o.x_range = Interval{*bif_x_lo, *bif_x_hi};
    }
    o.seed_grid = seed_grid;
    return o;
}

/// Splits `key=value`; throws on a missing '='.
[[nodiscard]] inline std::pair<std::string, std::string> split_assignment(std::string_view text) {
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected key=value, got '" + std::string(text) + "'");
    return {detail::trim(text.substr(0, eq)), detail::trim(text.substr(eq + 1))};
}

/// Applies a config file body: one `key = value` per line, `#` starts a comment.
inline void apply_config_text(RunConfig& cfg, const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string body = detail::trim(line);
        if (body.empty()) continue;
        try {
            const auto [k, v] = split_assignment(body);
            cfg.set(k, v);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
}

}  // namespace hysteresis
