#pragma once

// Periodic input signals with analytic derivatives and kink bookkeeping.

#include "hysteresis/expr.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

namespace hysteresis {

enum class SignalKind { sine, abs_sine, constant };

[[nodiscard]] inline std::string_view signal_kind_name(SignalKind k) noexcept {
    switch (k) {
        case SignalKind::sine: return "sine";
        case SignalKind::abs_sine: return "abs_sine";
        case SignalKind::constant: return "constant";
    }
    return "?";
}

[[nodiscard]] inline SignalKind parse_signal_kind(std::string_view name) {
    if (name == "sine") return SignalKind::sine;
    if (name == "abs_sine") return SignalKind::abs_sine;
    if (name == "constant") return SignalKind::constant;
    throw Error("unknown signal kind '" + std::string(name) + "' (expected sine, abs_sine or constant)");
}

/// Input value and its time derivative at one instant.
struct InputSample {
    double u = 0.0;
    double du = 0.0;
};

/// u(t) = A sin(wt), A |sin(wt)| or a constant level.
///
/// The constant kind has no natural period; `duration` is the total horizon
/// the integrator covers, split evenly into the requested number of periods.
struct Signal {
    SignalKind kind = SignalKind::sine;
    double amplitude = 1.0;
    double omega = 1.0;
    double level = 0.0;
    double duration = 0.0;

    [[nodiscard]] static Signal sine(double omega, double amplitude = 1.0) {
        return Signal{SignalKind::sine, amplitude, omega, 0.0, 0.0};
    }
    [[nodiscard]] static Signal abs_sine(double omega, double amplitude = 1.0) {
        return Signal{SignalKind::abs_sine, amplitude, omega, 0.0, 0.0};
    }
    [[nodiscard]] static Signal constant(double level, double duration) {
        return Signal{SignalKind::constant, 0.0, 0.0, level, duration};
    }

    void validate() const {
        if (kind == SignalKind::constant) {
            if (!(duration > 0.0) || !std::isfinite(duration)) {
                throw Error("constant signal requires a positive finite duration");
            }
            return;
        }
        if (!(omega > 0.0) || !std::isfinite(omega)) throw Error("signal omega must be positive and finite");
        if (!std::isfinite(amplitude)) throw Error("signal amplitude must be finite");
    }

    [[nodiscard]] double value(double t) const noexcept {
        switch (kind) {
            case SignalKind::sine: return amplitude * std::sin(omega * t);
            case SignalKind::abs_sine: return amplitude * std::fabs(std::sin(omega * t));
            case SignalKind::constant: return level;
        }
        return 0.0;
    }

    /// Exact derivative; at abs_sine kinks the sign(0) = 0 convention gives 0.
    [[nodiscard]] double derivative(double t) const noexcept { return derivative_with_branch(t, t); }

    /// Derivative at `t` with the abs_sine branch chosen by `branch_time`.
    /// Integrators pass the midpoint of the current smooth piece so stage
    /// evaluations sitting exactly on a kink use the one-sided value.
    [[nodiscard]] double derivative_with_branch(double t, double branch_time) const noexcept {
        switch (kind) {
            case SignalKind::sine: return amplitude * omega * std::cos(omega * t);
            case SignalKind::abs_sine:
                return amplitude * omega * std::cos(omega * t) * sign_of(std::sin(omega * branch_time));
            case SignalKind::constant: return 0.0;
        }
        return 0.0;
    }

    [[nodiscard]] InputSample sample(double t) const noexcept { return {value(t), derivative(t)}; }

    /// Sine: 2 pi / w.  abs_sine: pi / w.  Constant: the stored duration.
    [[nodiscard]] double period() const noexcept {
        switch (kind) {
            case SignalKind::sine: return 2.0 * std::numbers::pi / omega;
            case SignalKind::abs_sine: return std::numbers::pi / omega;
            case SignalKind::constant: return duration;
        }
        return 0.0;
    }

    /// Times in [t0, t1] where the right-hand side may lose smoothness:
    /// zeros of cos(wt) for sine (|du| kinks) and zeros of sin(wt) for
    /// abs_sine (kinks of u, jumps of du).
    [[nodiscard]] std::vector<double> kink_times(double t0, double t1) const {
        std::vector<double> out;
        if (kind == SignalKind::constant || t1 < t0) return out;
        const double offset = kind == SignalKind::sine ? std::numbers::pi / 2.0 : 0.0;
        const double slack = 1e-12 * std::max(1.0, std::max(std::fabs(t0), std::fabs(t1)));
        auto kink = [&](double k) { return (offset + k * std::numbers::pi) / omega; };
        double k = std::ceil((omega * t0 - offset) / std::numbers::pi);
        while (kink(k - 1.0) >= t0 - slack) k -= 1.0;
        while (kink(k) < t0 - slack) k += 1.0;
        for (; kink(k) <= t1 + slack; k += 1.0) out.push_back(kink(k));
        return out;
    }

    [[nodiscard]] std::string describe() const {
        std::string s(signal_kind_name(kind));
        if (kind == SignalKind::constant) return s + "(level=" + detail::format_number(level) + ")";
        return s + "(A=" + detail::format_number(amplitude) + ", omega=" + detail::format_number(omega) + ")";
    }
};

}  // namespace hysteresis
