#pragma once

// =============================================================================
// ODE models and the preset catalog
// =============================================================================
// Order 1:  x1' = f(t, x1, u, du)
// Order 2:  x1' = x2,  x2' = f(t, x1, x2, u, du)   (companion form)
// =============================================================================

#include "hysteresis/expr.hpp"
#include "hysteresis/signal.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace hysteresis {

/// Invalid model definition, unknown preset or bad override.
class ModelError : public Error {
public:
    using Error::Error;
};

/// Structural family a model belongs to. Families with state-affine
/// right-hand sides carry their coefficient expressions so impossibility
/// rules can be evaluated on them directly.
enum class Family {
    custom,
    first_order_linear,   // x' = a(t) x + b(t)
    duhem,                // x' = alpha |du| (beta u - x) + gamma du
    second_order_linear,  // y'' + p(t) y' + q(t) y = b(t)
    first_order_nonlinear,
    second_order_nonlinear,
};

[[nodiscard]] inline std::string_view family_name(Family f) noexcept {
    switch (f) {
        case Family::custom: return "custom";
        case Family::first_order_linear: return "first-order linear";
        case Family::duhem: return "Duhem";
        case Family::second_order_linear: return "second-order linear";
        case Family::first_order_nonlinear: return "first-order nonlinear";
        case Family::second_order_nonlinear: return "second-order nonlinear";
    }
    return "?";
}

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct ModelSpec {
    std::string name;
    int order = 1;
    Expr rhs;
    std::vector<double> initial_state;
    bool time_varying = false;
    bool asymptotic_autonomous = false;
    /// Right-hand side of the t -> infinity limit system (asymptotic models).
    std::optional<Expr> limit_rhs;

    Family family = Family::custom;
    /// Named coefficient expressions (a, b, p, q, alpha, ...) for affine families.
    std::map<std::string, Expr> coefficients;
    SignalKind default_signal = SignalKind::sine;
    Interval search_interval{-5.0, 5.0};
    Interval bifurcation_u_range{-1.0, 1.0};
};

// =============================================================================
// Construction and freezing
// =============================================================================

namespace detail {

inline void validate_model(const ModelSpec& m) {
    if (m.order != 1 && m.order != 2) throw ModelError("model order must be 1 or 2");
    if (m.initial_state.size() != static_cast<std::size_t>(m.order)) {
        throw ModelError("initial state must have " + std::to_string(m.order) + " component(s)");
    }
    for (double v : m.initial_state) {
        if (!std::isfinite(v)) throw ModelError("initial state must be finite");
    }
    if (m.order == 1 && m.rhs.references(Var::x2)) {
        throw ModelError("order-1 right-hand side must not reference x2");
    }
}

}  // namespace detail

/// Parses and validates a model from its right-hand side text.
[[nodiscard]] inline ModelSpec build_model(int order, std::string_view rhs_text, std::vector<double> initial_state,
                                           std::string name = "custom") {
    ModelSpec m;
    m.name = std::move(name);
    m.order = order;
    m.rhs = simplify(parse(rhs_text));
    m.initial_state = std::move(initial_state);
    m.time_varying = m.rhs.references(Var::t);
    m.family = order == 1 ? Family::first_order_nonlinear : Family::second_order_nonlinear;
    detail::validate_model(m);
    return m;
}

/// The model with the input held at u = U and du = 0.
struct FrozenSystem {
    int order = 1;
    double U = 0.0;
    Expr frozen_rhs;

    [[nodiscard]] bool time_varying() const noexcept { return frozen_rhs.references(Var::t); }
};

[[nodiscard]] inline Expr freeze_expr(const Expr& rhs, double U) {
    return simplify(substitute(substitute(rhs, Var::u, Expr::constant(U)), Var::du, Expr::constant(0.0)));
}

[[nodiscard]] inline FrozenSystem freeze(const ModelSpec& model, double U) {
    return FrozenSystem{model.order, U, freeze_expr(model.rhs, U)};
}

/// Thrown when an analysis is not defined for the given model, with a
/// short machine-readable reason code.
class AnalysisRefused : public Error {
public:
    AnalysisRefused(std::string code, const std::string& message) : Error(message), code_(std::move(code)) {}
    [[nodiscard]] const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

/// True when every constant state is an equilibrium: the frozen right-hand
/// side reduces to 0 and numerically vanishes at 64 pseudo-random states.
[[nodiscard]] inline bool is_continuum(const Expr& frozen_rhs) {
    if (frozen_rhs.references(Var::t)) {
        throw AnalysisRefused("time_varying",
                              "frozen system depends on t; use asymptotic analysis or simulation only");
    }
    if (!simplify(frozen_rhs).is_constant(0.0)) return false;
    std::mt19937_64 rng(0x5eedULL);
    std::uniform_real_distribution<double> dist(-10.0, 10.0);
    for (int i = 0; i < 64; ++i) {
        Env env;
        env.x1 = dist(rng);
        env.x2 = dist(rng);
        if (!(std::fabs(eval(frozen_rhs, env)) < 1e-12)) return false;
    }
    return true;
}

[[nodiscard]] inline bool is_continuum(const FrozenSystem& frozen) { return is_continuum(frozen.frozen_rhs); }

// =============================================================================
// Preset catalog
// =============================================================================

struct PresetParam {
    std::string name;
    std::string default_value;
};

struct PresetInfo {
    std::string name;
    Family family = Family::custom;
    int order = 1;
    std::string description;
    /// Right-hand side with {param} placeholders.
    std::string rhs_template;
    std::vector<PresetParam> params;
    /// x0 for order 1; y0, y1 for order 2.
    std::vector<PresetParam> initial;
    std::optional<std::string> limit_template;
    /// Parameter whose override invalidates the asymptotic flag.
    std::string asymptotic_param;
    SignalKind default_signal = SignalKind::sine;
    Interval search_interval{-5.0, 5.0};
    Interval bifurcation_u_range{-1.0, 1.0};
    /// Family coefficients as templates over the parameters.
    std::vector<PresetParam> coefficient_templates;
};

namespace detail {

inline PresetInfo entry(std::string name, Family family, int order, std::string description, std::string rhs,
                        std::vector<PresetParam> params, std::vector<PresetParam> initial) {
    PresetInfo p;
    p.name = std::move(name);
    p.family = family;
    p.order = order;
    p.description = std::move(description);
    p.rhs_template = std::move(rhs);
    p.params = std::move(params);
    p.initial = std::move(initial);
    return p;
}

inline std::vector<PresetInfo> build_catalog() {
    std::vector<PresetInfo> c;
    const std::string linear1 = "({a})*x + ({b})";
    const std::vector<PresetParam> ab{{"a", "{a}"}, {"b", "{b}"}};
    auto folode = [&](std::string name, std::string a, std::string b, std::string x0, std::string description) {
        PresetInfo p = entry(std::move(name), Family::first_order_linear, 1, std::move(description), linear1,
                             {{"a", std::move(a)}, {"b", std::move(b)}}, {{"x0", std::move(x0)}});
        p.coefficient_templates = ab;
        return p;
    };

    c.push_back(folode("folode_const_a", "-0.1", "abs(du)*u", "1", "x' = a x + b, constant a"));
    c.push_back(folode("folode_a0_u", "0", "u", "-1", "x' = u"));
    c.push_back(folode("folode_a0_abs", "0", "abs(du)*u", "0.5", "x' = |du| u"));
    {
        PresetInfo p = folode("folode_exp", "-exp(-t)", "abs(du)*u", "0.5", "x' = -exp(-t) x + |du| u");
        p.limit_template = "{b}";
        p.asymptotic_param = "a";
        c.push_back(std::move(p));
    }
    {
        PresetInfo p = folode("folode_rational", "-1/(t + 1)", "abs(du)*u", "0.5", "x' = -x/(t+1) + |du| u");
        p.limit_template = "{b}";
        p.asymptotic_param = "a";
        c.push_back(std::move(p));
    }
    c.push_back(folode("folode_t", "-t", "abs(du)*u", "0.5", "x' = -t x + |du| u"));
    c.push_back(folode("folode_rational_shift", "-1/(t + 1) + 1", "abs(du)*u", "0.5",
                       "x' = (1 - 1/(t+1)) x + |du| u"));
    {
        PresetInfo p = entry("duhem", Family::duhem, 1, "x' = alpha |du| (beta u - x) + gamma du",
                     "({alpha})*abs(du)*(({beta})*u - x) + ({gamma})*du",
                     {{"alpha", "0.5"}, {"beta", "0.5"}, {"gamma", "1"}}, {{"x0", "0"}});
        p.coefficient_templates = {{"alpha", "{alpha}"}, {"beta", "{beta}"}, {"gamma", "{gamma}"}};
        c.push_back(std::move(p));
    }
    {
        PresetInfo p = entry("solode", Family::second_order_linear, 2, "y'' + p y' + q y = b",
                     "-({p})*x2 - ({q})*x1 + ({b})",
                     {{"p", "exp(-t) + 1"}, {"q", "1"}, {"b", "abs(du)*u"}}, {{"y0", "1"}, {"y1", "0"}});
        p.coefficient_templates = {{"p", "{p}"}, {"q", "{q}"}, {"b", "{b}"}};
        c.push_back(std::move(p));
    }
    {
        PresetInfo p = entry("duhem2d", Family::second_order_linear, 2,
                     "y'' + p y' + alpha |du| y = alpha beta |du| u + gamma du",
                     "-({p})*x2 - ({alpha})*abs(du)*x1 + ({alpha})*({beta})*abs(du)*u + ({gamma})*du",
                     {{"p", "0.5"}, {"alpha", "1"}, {"beta", "1"}, {"gamma", "0"}},
                     {{"y0", "-0.225"}, {"y1", "0"}});
        p.coefficient_templates = {{"p", "{p}"},
                                   {"q", "{alpha}*abs(du)"},
                                   {"b", "{alpha}*{beta}*abs(du)*u + {gamma}*du"}};
        c.push_back(std::move(p));
    }
    c.push_back(entry("cubic_continuum", Family::first_order_nonlinear, 1, "x' = |du| (x - x^3 + u)",
                           "abs(du)*(x - x^3 + u)", {}, {{"x0", "1"}}));
    {
        PresetInfo p = entry("cubic", Family::first_order_nonlinear, 1, "x' = x - x^3 + u", "x - x^3 + u", {},
                     {{"x0", "-1"}});
        p.bifurcation_u_range = {-1.0, 1.0};
        c.push_back(std::move(p));
    }
    {
        PresetInfo p = entry("budworm", Family::first_order_nonlinear, 1, "x' = |u| x (1 - x/q) - x^2/(1 + x^2)",
                     "abs(u)*x*(1 - x/({q})) - x^2/(1 + x^2)", {{"q", "25"}}, {{"x0", "10"}});
        p.default_signal = SignalKind::abs_sine;
        p.search_interval = {-1.0, 30.0};
        p.bifurcation_u_range = {0.0, 1.0};
        c.push_back(std::move(p));
    }
    c.push_back(entry("pendulum_like", Family::second_order_nonlinear, 2, "y'' = -y' - 10 sin(y) + u",
                           "-x2 - 10*sin(x1) + u", {}, {{"y0", "0"}, {"y1", "0"}}));
    {
        PresetInfo p = entry("sonode15", Family::second_order_nonlinear, 2, "y'' = -5 y' - y^2 (y + 1) + u",
                     "-5*x2 - x1^2*(x1 + 1) + u", {}, {{"y0", "-1"}, {"y1", "0"}});
        p.bifurcation_u_range = {-0.5, 0.5};
        c.push_back(std::move(p));
    }
    {
        PresetInfo p = entry("sonode35", Family::second_order_nonlinear, 2,
                     "y'' = -y' - 20 y^3 (y - 0.3)(y + 0.5) + u", "-x2 - 20*x1^3*(x1 - 0.3)*(x1 + 0.5) + u", {},
                     {{"y0", "-0.56"}, {"y1", "0"}});
        p.bifurcation_u_range = {-0.2, 0.2};
        c.push_back(std::move(p));
    }
    return c;
}

inline std::string fill_template(const std::string& tmpl, const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size() * 2);
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        if (tmpl[i] != '{') {
            out += tmpl[i];
            continue;
        }
        const std::size_t close = tmpl.find('}', i);
        const std::string key = tmpl.substr(i + 1, close - i - 1);
        out += "(" + values.at(key) + ")";
        i = close;
    }
    return out;
}

inline double parse_scalar(const std::string& key, const std::string& text) {
    Expr e;
    try {
        e = parse(text);
    } catch (const ParseError& err) {
        throw ModelError("invalid value for '" + key + "': " + err.what());
    }
    for (Var v : all_vars) {
        if (e.references(v)) throw ModelError("'" + key + "' must be a number, got '" + text + "'");
    }
    const double value = eval(e, Env{});
    if (!std::isfinite(value)) throw ModelError("'" + key + "' must be finite");
    return value;
}

}  // namespace detail

/// Every built-in preset, in catalog order.
[[nodiscard]] inline const std::vector<PresetInfo>& preset_catalog() {
    static const std::vector<PresetInfo> catalog = detail::build_catalog();
    return catalog;
}

[[nodiscard]] inline const PresetInfo& preset_info(std::string_view name) {
    for (const auto& p : preset_catalog()) {
        if (p.name == name) return p;
    }
    throw ModelError("unknown preset '" + std::string(name) + "'");
}

using Overrides = std::map<std::string, std::string>;

/// Instantiates a preset. Override values may be numbers or, for
/// coefficient parameters, expression text (e.g. p = "abs(sin(t))").
[[nodiscard]] inline ModelSpec preset(std::string_view name, const Overrides& overrides = {}) {
    const PresetInfo& info = preset_info(name);
    std::map<std::string, std::string> values;
    for (const auto& p : info.params) values[p.name] = p.default_value;
    for (const auto& p : info.initial) values[p.name] = p.default_value;

    bool asymptotic = info.limit_template.has_value();
    for (const auto& [key, value] : overrides) {
        if (values.find(key) == values.end()) {
            std::string known;
            for (const auto& [k, unused] : values) known += (known.empty() ? "" : ", ") + k;
            throw ModelError("unknown override '" + key + "' for preset '" + info.name + "' (known: " + known + ")");
        }
        if (key == info.asymptotic_param && value != values[key]) asymptotic = false;
        values[key] = value;
    }

    ModelSpec m;
    m.name = info.name;
    m.order = info.order;
    m.family = info.family;
    m.default_signal = info.default_signal;
    m.search_interval = info.search_interval;
    m.bifurcation_u_range = info.bifurcation_u_range;
    try {
        m.rhs = simplify(parse(detail::fill_template(info.rhs_template, values)));
        for (const auto& c : info.coefficient_templates) {
            m.coefficients[c.name] = simplify(parse(detail::fill_template(c.default_value, values)));
        }
        if (asymptotic) {
            m.asymptotic_autonomous = true;
            m.limit_rhs = simplify(parse(detail::fill_template(*info.limit_template, values)));
        }
    } catch (const ParseError& err) {
        throw ModelError("preset '" + info.name + "': " + err.what());
    }
    for (const auto& p : info.initial) m.initial_state.push_back(detail::parse_scalar(p.name, values[p.name]));
    m.time_varying = m.rhs.references(Var::t);
    detail::validate_model(m);
    return m;
}

/// Right-hand side used for equilibrium analysis: the model itself, or its
/// t -> infinity limit for asymptotically autonomous models.
[[nodiscard]] inline const Expr& analysis_rhs(const ModelSpec& m) noexcept {
    return m.asymptotic_autonomous && m.limit_rhs ? *m.limit_rhs : m.rhs;
}

}  // namespace hysteresis
