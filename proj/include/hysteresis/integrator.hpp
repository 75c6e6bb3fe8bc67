#pragma once

// =============================================================================
// Kink-aware fixed-step RK4
// =============================================================================

#include "hysteresis/expr.hpp"
#include "hysteresis/model.hpp"
#include "hysteresis/signal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace hysteresis {

/// Right-hand side singularity hit during integration.
class IntegrationError : public Error {
public:
    IntegrationError(const std::string& message, double time)
        : Error(message + " at t = " + detail::format_number(time)), time_(time) {}
    [[nodiscard]] double time() const noexcept { return time_; }

private:
    double time_;
};

struct IntegrationParams {
    int periods = 3;
    int steps_per_period = 4096;
    /// Split grid steps at signal kinks so no RK stage straddles one.
    bool split_at_kinks = true;
    /// Subdivide a grid step when h times the local Jacobian spectral radius
    /// exceeds 2, keeping stiff stretches inside the RK4 stability region.
    bool stability_substeps = true;
    int max_substeps = 4096;
    double divergence_limit = 1e12;

    void validate() const {
        if (periods < 1) throw Error("periods must be >= 1");
        if (steps_per_period < 64) throw Error("steps_per_period must be >= 64");
        if (max_substeps < 1) throw Error("max_substeps must be >= 1");
        if (!(divergence_limit > 0.0)) throw Error("divergence_limit must be positive");
    }
};

using State = std::array<double, 2>;

struct Trajectory {
    std::string model_name;
    std::string signal_description;
    int order = 1;
    double period = 0.0;
    int steps_per_period = 0;
    std::vector<double> times;
    std::vector<State> states;
    std::vector<InputSample> inputs;
    bool diverged = false;
    /// Number of valid samples; equals times.size() (kept for reporting).
    std::size_t truncation_index = 0;

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
};

/// Samples (u, x1) of a trajectory.
struct IoCurve {
    std::vector<double> u;
    std::vector<double> x;
    std::vector<std::size_t> index;
    bool diverged = false;

    [[nodiscard]] std::size_t size() const noexcept { return u.size(); }
};

namespace detail {

class RhsEvaluator {
public:
    RhsEvaluator(const ModelSpec& model, const Signal& signal)
        : order_(model.order),
          signal_(signal),
          f_(model.rhs),
          f_x1_(differentiate(model.rhs, Var::x1)),
          f_x2_(differentiate(model.rhs, Var::x2)) {}

    [[nodiscard]] Env env(double t, const State& x, double branch_time) const {
        Env e;
        e.t = t;
        e.x1 = x[0];
        e.x2 = x[1];
        e.u = signal_.value(t);
        e.du = signal_.derivative_with_branch(t, branch_time);
        return e;
    }

    [[nodiscard]] State operator()(double t, const State& x, double branch_time) const {
        const Env e = env(t, x, branch_time);
        double value = 0.0;
        try {
            value = f_(e);
        } catch (const EvalError& err) {
            throw IntegrationError(std::string("singular right-hand side (") + err.what() + ")", t);
        }
        if (order_ == 1) return {value, 0.0};
        return {x[1], value};
    }

    /// Spectral radius of the state Jacobian; 0 if it cannot be evaluated.
    [[nodiscard]] double spectral_radius(double t, const State& x, double branch_time) const {
        const Env e = env(t, x, branch_time);
        try {
            const double b = f_x1_(e);
            if (order_ == 1) return std::fabs(b);
            const double a = f_x2_(e);
            const double disc = a * a + 4.0 * b;
            if (disc >= 0.0) {
                const double r = std::sqrt(disc);
                return std::max(std::fabs(0.5 * (a + r)), std::fabs(0.5 * (a - r)));
            }
            return std::sqrt(-b);  // |lambda|^2 = a^2/4 + (-disc)/4 = -b
        } catch (const EvalError&) {
            return 0.0;
        }
    }

private:
    int order_;
    Signal signal_;
    CompiledExpr f_;
    CompiledExpr f_x1_;
    CompiledExpr f_x2_;
};

inline State axpy(const State& x, double h, const State& k) { return {x[0] + h * k[0], x[1] + h * k[1]}; }

inline State rk4_step(const RhsEvaluator& f, double t, const State& x, double h, double branch) {
    const State k1 = f(t, x, branch);
    const State k2 = f(t + 0.5 * h, axpy(x, 0.5 * h, k1), branch);
    const State k3 = f(t + 0.5 * h, axpy(x, 0.5 * h, k2), branch);
    const State k4 = f(t + h, axpy(x, h, k3), branch);
    return {x[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            x[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])};
}

inline bool state_ok(const State& x, double limit) {
    return std::isfinite(x[0]) && std::isfinite(x[1]) && std::fabs(x[0]) <= limit && std::fabs(x[1]) <= limit;
}

}  // namespace detail

/// Integrates `model` under `signal` for periods * steps_per_period grid
/// steps of size period / steps_per_period. Samples are recorded on the
/// grid; RK stages read the exact analytic input.
[[nodiscard]] inline Trajectory integrate(const ModelSpec& model, const Signal& signal,
                                          const IntegrationParams& params = {}) {
    params.validate();
    signal.validate();
    if (model.initial_state.size() != static_cast<std::size_t>(model.order)) {
        throw ModelError("initial state does not match model order");
    }

    const detail::RhsEvaluator f(model, signal);
    const double period =
        signal.kind == SignalKind::constant ? signal.duration / params.periods : signal.period();
    const double h = period / params.steps_per_period;
    const std::size_t n_steps =
        static_cast<std::size_t>(params.periods) * static_cast<std::size_t>(params.steps_per_period);

    Trajectory traj;
    traj.model_name = model.name;
    traj.signal_description = signal.describe();
    traj.order = model.order;
    traj.period = period;
    traj.steps_per_period = params.steps_per_period;
    traj.times.reserve(n_steps + 1);
    traj.states.reserve(n_steps + 1);
    traj.inputs.reserve(n_steps + 1);

    State x{model.initial_state[0], model.order == 2 ? model.initial_state[1] : 0.0};
    auto record = [&](double t, const State& s, double branch) {
        traj.times.push_back(t);
        traj.states.push_back(s);
        traj.inputs.push_back({signal.value(t), signal.derivative_with_branch(t, branch)});
    };
    record(0.0, x, 0.5 * h);

    std::vector<double> cuts;
    for (std::size_t i = 0; i < n_steps; ++i) {
        const double a = static_cast<double>(i) * h;
        const double b = static_cast<double>(i + 1) * h;
        cuts.clear();
        cuts.push_back(a);
        if (params.split_at_kinks) {
            const double eps = 1e-9 * h;
            for (double k : signal.kink_times(a, b)) {
                if (k > a + eps && k < b - eps) cuts.push_back(k);
            }
        }
        cuts.push_back(b);

        for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
            const double t0 = cuts[j];
            const double t1 = cuts[j + 1];
            const double branch = 0.5 * (t0 + t1);
            int m = 1;
            if (params.stability_substeps) {
                const double rho = f.spectral_radius(t0, x, branch);
                const double need = std::ceil((t1 - t0) * rho / 2.0);
                if (std::isfinite(need) && need > 1.0) m = static_cast<int>(std::min<double>(need, params.max_substeps));
            }
            const double dt = (t1 - t0) / m;
            for (int s = 0; s < m; ++s) {
                x = detail::rk4_step(f, t0 + s * dt, x, dt, branch);
            }
        }

        if (!detail::state_ok(x, params.divergence_limit)) {
            traj.diverged = true;
            break;
        }
        record(b, x, b - 0.5 * h);
    }
    traj.truncation_index = traj.times.size();
    return traj;
}

/// Convenience overload matching the (periods, steps_per_period) call shape.
[[nodiscard]] inline Trajectory integrate(const ModelSpec& model, const Signal& signal, int periods,
                                          int steps_per_period) {
    IntegrationParams p;
    p.periods = periods;
    p.steps_per_period = steps_per_period;
    return integrate(model, signal, p);
}

[[nodiscard]] inline IoCurve to_io_curve(const Trajectory& traj) {
    IoCurve io;
    io.diverged = traj.diverged;
    io.u.reserve(traj.size());
    io.x.reserve(traj.size());
    io.index.reserve(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        io.u.push_back(traj.inputs[i].u);
        io.x.push_back(traj.states[i][0]);
        io.index.push_back(i);
    }
    return io;
}

}  // namespace hysteresis
