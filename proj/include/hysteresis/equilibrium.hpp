#pragma once

// =============================================================================
// Equilibria, stability, bifurcation values and impossibility rules
// =============================================================================
// All analysis runs on the frozen system (u = U, du = 0). Second-order models
// are reduced to g(x1) = f(x1, 0) since every equilibrium has x2 = 0.
// =============================================================================

#include "hysteresis/expr.hpp"
#include "hysteresis/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace hysteresis {

enum class Stability { stable, unstable, marginal };

[[nodiscard]] inline std::string_view stability_name(Stability s) noexcept {
    switch (s) {
        case Stability::stable: return "stable";
        case Stability::unstable: return "unstable";
        case Stability::marginal: return "marginal";
    }
    return "?";
}

inline constexpr double kStabilityTol = 1e-9;

struct Equilibrium {
    std::array<double, 2> state{0.0, 0.0};
    Stability stability = Stability::marginal;
    /// df/dx1 at the equilibrium (both orders).
    double fx = 0.0;
    /// Jacobian eigenvalues; order 1 stores fx twice with zero imaginary part.
    std::complex<double> eig1;
    std::complex<double> eig2;
};

struct EquilibriumReport {
    double U = 0.0;
    int order = 1;
    bool continuum = false;
    /// Meaningful only when continuum is true.
    Stability continuum_stability = Stability::marginal;
    std::vector<Equilibrium> equilibria;
    bool multistable = false;

    [[nodiscard]] int stable_count() const noexcept {
        return static_cast<int>(std::count_if(equilibria.begin(), equilibria.end(),
                                              [](const Equilibrium& e) { return e.stability == Stability::stable; }));
    }
};

// =============================================================================
// Frozen-system helpers
// =============================================================================

namespace detail {

/// Frozen right-hand side with t-dependence checked. Returns f(x1, x2; U).
inline Expr analysis_frozen(const ModelSpec& model, double U) {
    Expr frozen = freeze_expr(analysis_rhs(model), U);
    if (frozen.references(Var::t)) {
        throw AnalysisRefused("time_varying",
                              "model '" + model.name +
                                  "' is time-varying and not asymptotically autonomous; use simulation-based "
                                  "analysis only");
    }
    return frozen;
}

inline Expr reduce_to_x1(const Expr& frozen) { return simplify(substitute(frozen, Var::x2, Expr::constant(0.0))); }

/// Evaluates g at x, returning NaN at singular points.
inline double safe_eval(const CompiledExpr& g, const Env& env) {
    try {
        return g(env);
    } catch (const EvalError&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

inline double eval_at(const CompiledExpr& g, double x1) {
    Env env;
    env.x1 = x1;
    return safe_eval(g, env);
}

}  // namespace detail

// =============================================================================
// Classification
// =============================================================================

/// Order 1: sign of f_x. Order 2: eigenvalues of [[0, 1], [b, a]] with
/// a = df/dx2, b = df/dx1 at (x1, 0).
[[nodiscard]] inline Equilibrium classify_point(const Expr& frozen_rhs, int order, double x1,
                                                double tol = kStabilityTol) {
    Equilibrium eq;
    eq.state = {x1, 0.0};
    Env env;
    env.x1 = x1;
    const double b = eval(differentiate(frozen_rhs, Var::x1), env);
    eq.fx = b;
    if (order == 1) {
        eq.eig1 = eq.eig2 = {b, 0.0};
        eq.stability = b < -tol ? Stability::stable : (b > tol ? Stability::unstable : Stability::marginal);
        return eq;
    }
    const double a = eval(differentiate(frozen_rhs, Var::x2), env);
    const std::complex<double> root = std::sqrt(std::complex<double>(a * a + 4.0 * b, 0.0));
    eq.eig1 = 0.5 * (a + root);
    eq.eig2 = 0.5 * (a - root);
    const double re_max = std::max(eq.eig1.real(), eq.eig2.real());
    if (re_max < -tol) {
        eq.stability = Stability::stable;
    } else if (re_max > tol) {
        eq.stability = Stability::unstable;
    } else {
        eq.stability = Stability::marginal;
    }
    return eq;
}

/// Stability of an equilibrium of `model` at input level U.
[[nodiscard]] inline Stability classify(const ModelSpec& model, const Equilibrium& eq, double U) {
    return classify_point(detail::analysis_frozen(model, U), model.order, eq.state[0]).stability;
}

namespace detail {

/// Stability of a continuum of equilibria, judged on the unfrozen
/// right-hand side while the input moves (du != 0).
inline Stability continuum_stability(const ModelSpec& model, double U, Interval interval,
                                     double tol = kStabilityTol) {
    const Expr rhs = analysis_rhs(model);
    const CompiledExpr fx1(differentiate(rhs, Var::x1));
    const CompiledExpr fx2(differentiate(rhs, Var::x2));
    const std::array<double, 6> dus{-2.0, -1.0, -0.25, 0.25, 1.0, 2.0};
    bool all_positive = true;
    bool all_negative = true;
    bool any_negative_damping = false;
    bool all_damped = true;
    for (double du : dus) {
        for (int i = 0; i <= 16; ++i) {
            Env env;
            env.u = U;
            env.du = du;
            env.x1 = interval.lo + (interval.hi - interval.lo) * i / 16.0;
            const double d1 = safe_eval(fx1, env);
            if (std::isnan(d1)) continue;
            all_positive = all_positive && d1 > tol;
            all_negative = all_negative && d1 < -tol;
            if (model.order == 2) {
                const double d2 = safe_eval(fx2, env);
                if (std::isnan(d2)) continue;
                any_negative_damping = any_negative_damping || d2 > tol;
                all_damped = all_damped && d2 < -tol;
            }
        }
    }
    if (model.order == 1) {
        if (all_positive) return Stability::unstable;
        if (all_negative) return Stability::stable;
        return Stability::marginal;
    }
    if (any_negative_damping || all_positive) return Stability::unstable;
    if (all_damped) return Stability::stable;
    return Stability::marginal;
}

inline double bisect(const CompiledExpr& g, double lo, double hi, double glo) {
    while (hi - lo > 1e-13) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double gm = eval_at(g, mid);
        if (gm == 0.0) return mid;
        if (std::isnan(gm)) break;
        if ((gm < 0.0) == (glo < 0.0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// One Newton step, kept only if it does not increase the residual.
inline double newton_polish(const CompiledExpr& g, const CompiledExpr& dg, double x) {
    const double gx = eval_at(g, x);
    const double d = eval_at(dg, x);
    if (!std::isfinite(gx) || !std::isfinite(d) || d == 0.0) return x;
    const double candidate = x - gx / d;
    const double gc = eval_at(g, candidate);
    if (std::isfinite(gc) && std::fabs(gc) <= std::fabs(gx) && std::fabs(candidate - x) < 1e-6) return candidate;
    return x;
}

/// Roots of even multiplicity give no sign change; look for a critical
/// point of g near a local minimum of |g| and accept it if g vanishes there.
inline std::optional<double> touching_root(const CompiledExpr& g, const CompiledExpr& dg, const CompiledExpr& d2g,
                                           double lo, double hi, double x) {
    for (int it = 0; it < 60; ++it) {
        const double d = eval_at(dg, x);
        const double dd = eval_at(d2g, x);
        if (!std::isfinite(d) || !std::isfinite(dd) || dd == 0.0) break;
        const double next = x - d / dd;
        if (!(next >= lo && next <= hi)) return std::nullopt;
        const bool done = std::fabs(next - x) < 1e-15 * std::max(1.0, std::fabs(x));
        x = next;
        if (done) break;
    }
    const double gx = eval_at(g, x);
    if (std::isfinite(gx) && std::fabs(gx) < 1e-10 && x >= lo && x <= hi) return x;
    return std::nullopt;
}

}  // namespace detail

// =============================================================================
// Equilibrium search
// =============================================================================

struct EquilibriumOptions {
    std::optional<Interval> interval;  // defaults to the model's search interval
    int grid_n = 4000;
    double tol = kStabilityTol;
};

/// Roots of the frozen system on [lo, hi] via sign-change scan, bisection
/// and a Newton polish; continua short-circuit.
[[nodiscard]] inline EquilibriumReport find_equilibria(const ModelSpec& model, double U,
                                                       const EquilibriumOptions& opts = {}) {
    const Interval iv = opts.interval.value_or(model.search_interval);
    if (!(iv.lo < iv.hi)) throw Error("equilibrium search interval must satisfy lo < hi");
    if (opts.grid_n < 100) throw Error("grid_n must be >= 100");

    const Expr frozen = detail::analysis_frozen(model, U);
    const Expr g_expr = detail::reduce_to_x1(frozen);

    EquilibriumReport report;
    report.U = U;
    report.order = model.order;
    if (is_continuum(g_expr)) {
        report.continuum = true;
        report.continuum_stability = detail::continuum_stability(model, U, iv, opts.tol);
        report.multistable = report.continuum_stability != Stability::unstable;
        return report;
    }

    const Expr dg_expr = differentiate(g_expr, Var::x1);
    const CompiledExpr g(g_expr);
    const CompiledExpr dg(dg_expr);
    const CompiledExpr d2g(differentiate(dg_expr, Var::x1));

    const int n = opts.grid_n;
    std::vector<double> xs(n);
    std::vector<double> gs(n);
    for (int i = 0; i < n; ++i) {
        xs[i] = i + 1 == n ? iv.hi : iv.lo + (iv.hi - iv.lo) * static_cast<double>(i) / (n - 1);
        gs[i] = detail::eval_at(g, xs[i]);
    }

    std::vector<double> roots;
    auto accept = [&](double x) {
        const double r = detail::eval_at(g, x);
        if (std::isfinite(r) && std::fabs(r) < 1e-10) roots.push_back(x);
    };
    for (int i = 0; i < n; ++i) {
        if (gs[i] == 0.0) {
            roots.push_back(xs[i]);
            continue;
        }
        if (i + 1 < n && std::isfinite(gs[i]) && std::isfinite(gs[i + 1]) && gs[i + 1] != 0.0 &&
            (gs[i] < 0.0) != (gs[i + 1] < 0.0)) {
            const double x = detail::bisect(g, xs[i], xs[i + 1], gs[i]);
            accept(detail::newton_polish(g, dg, x));
        }
        if (i > 0 && i + 1 < n && std::isfinite(gs[i - 1]) && std::isfinite(gs[i + 1]) &&
            std::fabs(gs[i]) <= std::fabs(gs[i - 1]) && std::fabs(gs[i]) <= std::fabs(gs[i + 1]) &&
            (gs[i - 1] < 0.0) == (gs[i] < 0.0) && (gs[i + 1] < 0.0) == (gs[i] < 0.0)) {
            if (auto r = detail::touching_root(g, dg, d2g, xs[i - 1], xs[i + 1], xs[i])) roots.push_back(*r);
        }
    }

    std::sort(roots.begin(), roots.end());
    std::vector<double> merged;
    for (double r : roots) {
        if (merged.empty() || r - merged.back() > 1e-8) merged.push_back(r);
    }
    for (double r : merged) report.equilibria.push_back(classify_point(frozen, model.order, r, opts.tol));
    report.multistable = report.stable_count() >= 2;
    return report;
}

[[nodiscard]] inline EquilibriumReport find_equilibria(const ModelSpec& model, double U, Interval interval,
                                                       int grid_n = 4000) {
    EquilibriumOptions opts;
    opts.interval = interval;
    opts.grid_n = grid_n;
    return find_equilibria(model, U, opts);
}

// =============================================================================
// Bifurcation values
// =============================================================================

struct BifurcationPoint {
    double U = 0.0;
    double x = 0.0;
    double residual_f = 0.0;
    double residual_fx = 0.0;
};

struct BifurcationSet {
    std::vector<BifurcationPoint> points;  // sorted by U, then x
    Interval u_range;
    Interval x_range;
    int seeds_tried = 0;
    int seeds_converged = 0;
    int seeds_singular = 0;

    /// Distinct U values in ascending order (merged within `tol`).
    [[nodiscard]] std::vector<double> values(double tol = 1e-8) const {
        std::vector<double> us;
        for (const auto& p : points) us.push_back(p.U);
        std::sort(us.begin(), us.end());
        std::vector<double> out;
        for (double u : us) {
            if (out.empty() || u - out.back() > tol) out.push_back(u);
        }
        return out;
    }
};

struct BifurcationOptions {
    std::optional<Interval> u_range;
    std::optional<Interval> x_range;
    int seed_grid = 64;
    int max_iterations = 50;
    double tolerance = 1e-11;
    double dedupe = 1e-8;
};

/// Newton on F(x, U) = (f, f_x) with the symbolic Jacobian
/// [[f_x, f_U], [f_xx, f_xU]] from every point of a seed grid.
[[nodiscard]] inline BifurcationSet solve_bifurcations(const ModelSpec& model, const BifurcationOptions& opts = {}) {
    if (opts.seed_grid < 2) throw Error("seed_grid must be >= 2");
    BifurcationSet set;
    set.u_range = opts.u_range.value_or(model.bifurcation_u_range);
    set.x_range = opts.x_range.value_or(model.search_interval);

    Expr f = simplify(substitute(analysis_rhs(model), Var::du, Expr::constant(0.0)));
    f = simplify(substitute(f, Var::x2, Expr::constant(0.0)));
    if (f.references(Var::t)) {
        throw AnalysisRefused("time_varying", "bifurcation analysis requires an autonomous frozen system");
    }
    const Expr fx = differentiate(f, Var::x1);
    const CompiledExpr F0(f);
    const CompiledExpr F1(fx);
    const CompiledExpr J00(fx);
    const CompiledExpr J01(differentiate(f, Var::u));
    const CompiledExpr J10(differentiate(fx, Var::x1));
    const CompiledExpr J11(differentiate(fx, Var::u));

    auto residual = [&](double x, double U, double& r0, double& r1) {
        Env env;
        env.x1 = x;
        env.u = U;
        r0 = detail::safe_eval(F0, env);
        r1 = detail::safe_eval(F1, env);
        return std::isfinite(r0) && std::isfinite(r1);
    };

    const double u_slack = 1e-9 * std::max(1.0, set.u_range.hi - set.u_range.lo);
    const double x_slack = 1e-9 * std::max(1.0, set.x_range.hi - set.x_range.lo);
    std::vector<BifurcationPoint> found;
    const int n = opts.seed_grid;
    for (int iu = 0; iu < n; ++iu) {
        for (int ix = 0; ix < n; ++ix) {
            ++set.seeds_tried;
            double U = set.u_range.lo + (set.u_range.hi - set.u_range.lo) * iu / (n - 1.0);
            double x = set.x_range.lo + (set.x_range.hi - set.x_range.lo) * ix / (n - 1.0);
            bool singular = false;
            bool converged = false;
            double r0 = 0.0;
            double r1 = 0.0;
            for (int it = 0; it < opts.max_iterations; ++it) {
                if (!residual(x, U, r0, r1)) break;
                Env env;
                env.x1 = x;
                env.u = U;
                const double a = detail::safe_eval(J00, env);
                const double b = detail::safe_eval(J01, env);
                const double c = detail::safe_eval(J10, env);
                const double d = detail::safe_eval(J11, env);
                const double det = a * d - b * c;
                const bool small = std::max(std::fabs(r0), std::fabs(r1)) < opts.tolerance;
                if (!std::isfinite(det) || det == 0.0) {
                    singular = !small;
                    converged = small;
                    break;
                }
                const double dx = (d * r0 - b * r1) / det;
                const double dU = (a * r1 - c * r0) / det;
                x -= dx;
                U -= dU;
                if (!std::isfinite(x) || !std::isfinite(U)) break;
                // Keep iterating past the residual tolerance until the step
                // stalls so degenerate roots land tightly enough to dedupe.
                if (small && std::fabs(dx) < 1e-14 * std::max(1.0, std::fabs(x)) &&
                    std::fabs(dU) < 1e-14 * std::max(1.0, std::fabs(U))) {
                    converged = true;
                    break;
                }
            }
            if (singular) {
                ++set.seeds_singular;
                continue;
            }
            if (!residual(x, U, r0, r1)) continue;
            if (!converged && std::max(std::fabs(r0), std::fabs(r1)) >= opts.tolerance) continue;
            if (std::max(std::fabs(r0), std::fabs(r1)) >= opts.tolerance) continue;
            if (U < set.u_range.lo - u_slack || U > set.u_range.hi + u_slack) continue;
            if (x < set.x_range.lo - x_slack || x > set.x_range.hi + x_slack) continue;
            ++set.seeds_converged;
            const bool duplicate = std::any_of(found.begin(), found.end(), [&](const BifurcationPoint& p) {
                return std::fabs(p.U - U) <= opts.dedupe && std::fabs(p.x - x) <= opts.dedupe;
            });
            if (!duplicate) found.push_back({U, x, r0, r1});
        }
    }
    std::sort(found.begin(), found.end(), [](const BifurcationPoint& a, const BifurcationPoint& b) {
        return a.U != b.U ? a.U < b.U : a.x < b.x;
    });
    set.points = std::move(found);
    return set;
}

// =============================================================================
// Bifurcation diagram
// =============================================================================

struct DiagramRow {
    double U = 0.0;
    double x = 0.0;
    Stability stability = Stability::marginal;
};

struct BifurcationDiagram {
    std::vector<DiagramRow> rows;
    /// U samples at which the frozen system has a continuum (no rows emitted).
    std::vector<double> continuum_at;
};

[[nodiscard]] inline BifurcationDiagram bifurcation_diagram(const ModelSpec& model, Interval u_range, int n_U,
                                                            const EquilibriumOptions& opts = {}) {
    if (n_U < 50) throw Error("diagram requires n_U >= 50");
    BifurcationDiagram diagram;
    for (int i = 0; i < n_U; ++i) {
        const double U = u_range.lo + (u_range.hi - u_range.lo) * i / (n_U - 1.0);
        const EquilibriumReport r = find_equilibria(model, U, opts);
        if (r.continuum) {
            diagram.continuum_at.push_back(U);
            continue;
        }
        for (const auto& e : r.equilibria) diagram.rows.push_back({U, e.state[0], e.stability});
    }
    return diagram;
}

// =============================================================================
// Multistability (necessary condition) check
// =============================================================================

enum class ImpossibilityRule {
    none,
    constant_linear_coefficient,  // x' = a x + b with constant a != 0
    unstable_continuum,           // continuum of equilibria that repels while the input moves
    constant_stiffness,           // y'' + p y' + q y = b with constant q != 0
    negative_damping,             // p(t) < 0 for some t
    fewer_than_two_stable,        // never two stable equilibria at any sampled U
};

[[nodiscard]] inline std::string_view rule_name(ImpossibilityRule r) noexcept {
    switch (r) {
        case ImpossibilityRule::none: return "none";
        case ImpossibilityRule::constant_linear_coefficient: return "constant_linear_coefficient";
        case ImpossibilityRule::unstable_continuum: return "unstable_continuum";
        case ImpossibilityRule::constant_stiffness: return "constant_stiffness";
        case ImpossibilityRule::negative_damping: return "negative_damping";
        case ImpossibilityRule::fewer_than_two_stable: return "fewer_than_two_stable";
    }
    return "?";
}

struct MultistabilityVerdict {
    /// true: hysteresis ruled out. false: the necessary condition holds,
    /// which says nothing about sufficiency.
    bool hysteresis_impossible = false;
    ImpossibilityRule rule = ImpossibilityRule::none;
    std::string explanation;
    /// (U, number of stable equilibria, continuum flag) per sample; empty
    /// when a coefficient rule decided without enumeration.
    struct Sample {
        double U;
        int stable;
        bool continuum;
        Stability continuum_stability;
    };
    std::vector<Sample> samples;
};

namespace detail {

inline bool is_time_only(const Expr& e) {
    return !e.references(Var::x1) && !e.references(Var::x2) && !e.references(Var::u) && !e.references(Var::du);
}

inline bool is_constant_expr(const Expr& e) { return is_time_only(e) && !e.references(Var::t); }

/// min over t in [0, 100] of a coefficient that depends on t only.
inline double min_over_time(const Expr& e, int samples = 10001) {
    const CompiledExpr c(e);
    double lo = std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i) {
        Env env;
        env.t = 100.0 * i / (samples - 1.0);
        const double v = safe_eval(c, env);
        if (std::isfinite(v)) lo = std::min(lo, v);
    }
    return lo;
}

}  // namespace detail

[[nodiscard]] inline MultistabilityVerdict multistability_check(const ModelSpec& model,
                                                                const std::vector<double>& U_samples,
                                                                const EquilibriumOptions& opts = {}) {
    if (U_samples.empty()) throw Error("multistability_check requires at least one U sample");
    MultistabilityVerdict v;
    auto impossible = [&](ImpossibilityRule rule, std::string why) {
        v.hysteresis_impossible = true;
        v.rule = rule;
        v.explanation = std::move(why);
        return v;
    };

    const auto coef = [&](const char* key) -> const Expr* {
        auto it = model.coefficients.find(key);
        return it == model.coefficients.end() ? nullptr : &it->second;
    };

    if (model.family == Family::first_order_linear) {
        if (const Expr* a = coef("a"); a && detail::is_constant_expr(*a) && eval(*a, Env{}) != 0.0) {
            return impossible(ImpossibilityRule::constant_linear_coefficient,
                              "a is the nonzero constant " + to_text(*a) + ": exactly one equilibrium -U/a");
        }
    }
    if (model.family == Family::second_order_linear) {
        if (const Expr* q = coef("q"); q && detail::is_constant_expr(*q) && eval(*q, Env{}) != 0.0) {
            return impossible(ImpossibilityRule::constant_stiffness,
                              "q is the nonzero constant " + to_text(*q) + ": exactly one equilibrium");
        }
        if (const Expr* p = coef("p"); p && detail::is_time_only(*p)) {
            const double pmin = detail::min_over_time(*p);
            if (pmin < 0.0) {
                return impossible(ImpossibilityRule::negative_damping,
                                  "p(t) = " + to_text(*p) + " reaches " + detail::format_number(pmin) +
                                      " < 0 on t in [0, 100]");
            }
        }
    }

    bool any_continuum = false;
    for (double U : U_samples) {
        const EquilibriumReport r = find_equilibria(model, U, opts);
        v.samples.push_back({U, r.stable_count(), r.continuum, r.continuum_stability});
        if (r.continuum) any_continuum = true;
        if (r.multistable) {
            v.hysteresis_impossible = false;
            v.rule = ImpossibilityRule::none;
            v.explanation = r.continuum ? "non-repelling continuum of equilibria at U = " + detail::format_number(U)
                                        : std::to_string(r.stable_count()) + " stable equilibria at U = " +
                                              detail::format_number(U);
            return v;
        }
    }
    v.hysteresis_impossible = true;
    if (any_continuum) {
        v.rule = ImpossibilityRule::unstable_continuum;
        v.explanation = "every continuum of equilibria is repelling while the input moves";
    } else {
        v.rule = ImpossibilityRule::fewer_than_two_stable;
        v.explanation = "fewer than two stable equilibria at every sampled U";
    }
    return v;
}

}  // namespace hysteresis
