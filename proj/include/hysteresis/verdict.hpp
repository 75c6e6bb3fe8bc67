#pragma once

// =============================================================================
// Frequency sweep and loop-persistence classification
// =============================================================================

#include "hysteresis/equilibrium.hpp"
#include "hysteresis/integrator.hpp"
#include "hysteresis/loop.hpp"
#include "hysteresis/model.hpp"
#include "hysteresis/signal.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace hysteresis {

/// Every frequency of a sweep hit a singular right-hand side.
class SweepFailure : public Error {
public:
    using Error::Error;
};

struct SweepParams {
    IntegrationParams integration;
    int discard_periods = 2;
    double amplitude = 1.0;
    LoopOptions loop;
    /// Worker threads for the per-frequency runs; 0 picks the hardware count.
    int workers = 0;
};

/// Outcome of one simulated frequency.
struct SweepPoint {
    double omega = 0.0;
    bool diverged = false;
    bool failed = false;
    std::string error;
    SteadyLoop loop;
};

struct SweepResult {
    std::string model_name;
    SignalKind signal_kind = SignalKind::sine;
    /// Sorted by strictly decreasing omega.
    std::vector<SweepPoint> points;
    SweepParams params;
};

/// Simulates one frequency and extracts its steady loop.
[[nodiscard]] inline SweepPoint run_frequency(const ModelSpec& model, SignalKind kind, double omega,
                                              const SweepParams& params = {}) {
    SweepPoint point;
    point.omega = omega;
    if (kind == SignalKind::constant) throw Error("frequency sweeps need a periodic signal");
    const Signal signal{kind, params.amplitude, omega, 0.0, 0.0};
    if (params.integration.periods < params.discard_periods + 1) {
        throw Error("periods must exceed discard_periods");
    }
    try {
        const Trajectory traj = integrate(model, signal, params.integration);
        point.diverged = traj.diverged;
        point.loop = extract_steady_loop(to_io_curve(traj), params.integration.steps_per_period,
                                         params.discard_periods, params.loop);
    } catch (const IntegrationError& e) {
        point.failed = true;
        point.error = e.what();
    }
    return point;
}

/// Runs every frequency (in parallel when workers allow) and returns the
/// points sorted by decreasing omega. Divergence is recorded, not fatal.
[[nodiscard]] inline SweepResult frequency_sweep(const ModelSpec& model, SignalKind kind, std::vector<double> omegas,
                                                 const SweepParams& params = {}) {
    std::sort(omegas.begin(), omegas.end(), std::greater<>());
    if (omegas.size() < 3) throw Error("a frequency sweep needs at least 3 frequencies");
    for (std::size_t i = 0; i < omegas.size(); ++i) {
        if (!(omegas[i] > 0.0) || !std::isfinite(omegas[i])) throw Error("sweep frequencies must be positive");
        if (i > 0 && omegas[i] == omegas[i - 1]) throw Error("sweep frequencies must be distinct");
    }
    params.integration.validate();

    SweepResult result;
    result.model_name = model.name;
    result.signal_kind = kind;
    result.params = params;
    result.points.resize(omegas.size());

    std::size_t workers = params.workers > 0 ? static_cast<std::size_t>(params.workers)
                                             : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, omegas.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < omegas.size(); i = next++) {
            try {
                result.points[i] = run_frequency(model, kind, omegas[i], params);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    if (std::all_of(result.points.begin(), result.points.end(), [](const SweepPoint& p) { return p.failed; })) {
        throw SweepFailure("every frequency of the sweep failed: " + result.points.front().error);
    }
    return result;
}

// =============================================================================
// Classification
// =============================================================================

enum class Verdict { hysteretic, degenerate, unbounded, no_loop, inconclusive };
enum class Rate { independent, dependent, not_applicable };

[[nodiscard]] inline std::string_view verdict_name(Verdict v) noexcept {
    switch (v) {
        case Verdict::hysteretic: return "hysteretic";
        case Verdict::degenerate: return "degenerate";
        case Verdict::unbounded: return "unbounded";
        case Verdict::no_loop: return "no_loop";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

[[nodiscard]] inline std::string_view rate_name(Rate r) noexcept {
    switch (r) {
        case Rate::independent: return "independent";
        case Rate::dependent: return "dependent";
        case Rate::not_applicable: return "not_applicable";
    }
    return "?";
}

struct VerdictThresholds {
    double degenerate_fraction = 0.05;
    double unbounded_exponent = 0.5;
    double rate_threshold = 0.05;
    int fit_points = 3;
};

struct HysteresisVerdict {
    Verdict verdict = Verdict::inconclusive;
    Rate rate = Rate::not_applicable;
    /// p in A(omega) ~ c * omega^(-p); NaN when the fit is impossible.
    double area_exponent = std::numeric_limits<double>::quiet_NaN();
    /// Relative loop distance between the two smallest frequencies.
    double relative_loop_distance = std::numeric_limits<double>::quiet_NaN();
    std::string reason;
    VerdictThresholds thresholds;
    /// Jump locations per swept frequency, in sweep order.
    std::vector<std::vector<double>> jump_u;
};

namespace detail {

/// Least-squares slope of log A against log omega, negated.
inline double fit_area_exponent(const std::vector<const SweepPoint*>& pts) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(pts.size());
    for (const SweepPoint* p : pts) {
        const double area = p->loop.geometric_area;
        if (!(area > 0.0) || !std::isfinite(area)) return std::numeric_limits<double>::quiet_NaN();
        const double lx = std::log(p->omega);
        const double ly = std::log(area);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    if (pts.size() < 2 || denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return -(n * sxy - sx * sy) / denom;
}

}  // namespace detail

/// Decision procedure, evaluated on the sweep sorted by decreasing omega:
///   1. no closed loop at any frequency                      -> no_loop
///   2. area exponent p > unbounded_exponent, or divergence  -> unbounded
///   3. A(min) < fraction * A(max) with monotone shrinking,
///      or zero area throughout                              -> degenerate
///   4. A(min) < fraction * A(max) otherwise, or the smallest
///      frequency gives no closed loop                       -> inconclusive
///   5. else                                                 -> hysteretic
[[nodiscard]] inline HysteresisVerdict classify(const SweepResult& sweep, const VerdictThresholds& thresholds = {}) {
    HysteresisVerdict v;
    v.thresholds = thresholds;

    std::vector<const SweepPoint*> usable;
    for (const auto& p : sweep.points) {
        if (!p.failed) usable.push_back(&p);
    }
    std::sort(usable.begin(), usable.end(), [](const SweepPoint* a, const SweepPoint* b) { return a->omega > b->omega; });
    for (const SweepPoint* p : usable) {
        std::vector<double> us;
        for (const auto& j : p->loop.jumps) us.push_back(j.u_at_jump);
        v.jump_u.push_back(std::move(us));
    }
    if (usable.size() < 3) {
        v.verdict = Verdict::inconclusive;
        v.reason = "fewer than 3 usable frequencies";
        return v;
    }

    const bool any_diverged = std::any_of(usable.begin(), usable.end(), [](const SweepPoint* p) { return p->diverged; });
    const bool any_closed = std::any_of(usable.begin(), usable.end(),
                                        [](const SweepPoint* p) { return !p->diverged && p->loop.closed; });
    if (!any_closed) {
        v.verdict = Verdict::no_loop;
        v.reason = "no frequency produced a closed loop";
        return v;
    }

    const std::size_t k = std::min<std::size_t>(std::max(2, thresholds.fit_points), usable.size());
    const std::vector<const SweepPoint*> tail(usable.end() - static_cast<std::ptrdiff_t>(k), usable.end());
    if (!any_diverged) v.area_exponent = detail::fit_area_exponent(tail);
    if (any_diverged || v.area_exponent > thresholds.unbounded_exponent) {
        v.verdict = Verdict::unbounded;
        v.reason = any_diverged ? "trajectory diverged at some frequency"
                                : "loop area grows like omega^-" + detail::format_number(v.area_exponent);
        return v;
    }
    const double a_max = usable.front()->loop.geometric_area;
    const double a_min = usable.back()->loop.geometric_area;
    bool shrinking = true;
    for (std::size_t i = 1; i < usable.size(); ++i) {
        shrinking = shrinking && usable[i]->loop.geometric_area <= usable[i - 1]->loop.geometric_area;
    }
    if (a_max == 0.0 || a_min < thresholds.degenerate_fraction * a_max) {
        v.verdict = shrinking ? Verdict::degenerate : Verdict::inconclusive;
        v.reason = shrinking ? "loop area shrinks monotonically toward zero"
                             : "small final area but non-monotone area trend";
        return v;
    }
    const SweepPoint& lowest = *usable.back();
    if (!lowest.loop.closed) {
        v.verdict = Verdict::inconclusive;
        v.reason = "no closed loop at the smallest frequency";
        return v;
    }

    v.verdict = Verdict::hysteretic;
    v.reason = "closed loop of non-vanishing area persists as omega decreases";
    const SweepPoint& second = *usable[usable.size() - 2];
    const LoopDistance d = loop_distance(second.loop, lowest.loop);
    v.relative_loop_distance = d.relative();
    v.rate = v.relative_loop_distance < thresholds.rate_threshold ? Rate::independent : Rate::dependent;
    return v;
}

// =============================================================================
// Jump / bifurcation correspondence
// =============================================================================

struct JumpMatch {
    double omega = 0.0;
    double u_at_jump = 0.0;
    double bifurcation_u = 0.0;
    double residual = 0.0;
};

struct JumpMatchTable {
    std::vector<JumpMatch> rows;
    /// Largest residual at the largest and smallest frequency with jumps.
    double residual_at_max_omega = std::numeric_limits<double>::quiet_NaN();
    double residual_at_min_omega = std::numeric_limits<double>::quiet_NaN();
    bool converging = false;
};

/// Distance from `target` to the nearest jump of a loop (infinity if none).
[[nodiscard]] inline double jump_residual(const SteadyLoop& loop, double target) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& j : loop.jumps) best = std::min(best, std::fabs(j.u_at_jump - target));
    return best;
}

[[nodiscard]] inline JumpMatchTable jump_bifurcation_match(const std::vector<SweepPoint>& points,
                                                           const std::vector<double>& bifurcation_values) {
    JumpMatchTable table;
    if (bifurcation_values.empty()) return table;
    std::vector<const SweepPoint*> sorted;
    for (const auto& p : points) {
        if (!p.failed && !p.loop.jumps.empty()) sorted.push_back(&p);
    }
    std::sort(sorted.begin(), sorted.end(), [](const SweepPoint* a, const SweepPoint* b) { return a->omega > b->omega; });
    std::vector<double> worst;
    for (const SweepPoint* p : sorted) {
        double w = 0.0;
        for (const auto& j : p->loop.jumps) {
            double best_u = bifurcation_values.front();
            for (double b : bifurcation_values) {
                if (std::fabs(j.u_at_jump - b) < std::fabs(j.u_at_jump - best_u)) best_u = b;
            }
            const double r = std::fabs(j.u_at_jump - best_u);
            table.rows.push_back({p->omega, j.u_at_jump, best_u, r});
            w = std::max(w, r);
        }
        worst.push_back(w);
    }
    if (!worst.empty()) {
        table.residual_at_max_omega = worst.front();
        table.residual_at_min_omega = worst.back();
        table.converging = worst.size() >= 2 && worst.back() < worst.front();
    }
    return table;
}

[[nodiscard]] inline JumpMatchTable jump_bifurcation_match(const SweepResult& sweep, const BifurcationSet& bif) {
    return jump_bifurcation_match(sweep.points, bif.values());
}

}  // namespace hysteresis
