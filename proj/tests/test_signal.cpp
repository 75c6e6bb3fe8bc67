#include "hysteresis/signal.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace hysteresis;
using Catch::Approx;

TEST_CASE("sine and abs_sine values and periods", "[signal]") {
    const Signal s = Signal::sine(0.5, 2.0);
    CHECK(s.value(std::numbers::pi) == Approx(2.0));
    CHECK(s.period() == Approx(4.0 * std::numbers::pi));
    const Signal a = Signal::abs_sine(2.0);
    CHECK(a.value(3.0 * std::numbers::pi / 4.0) == Approx(1.0));
    CHECK(a.period() == Approx(std::numbers::pi / 2.0));
    const Signal c = Signal::constant(0.3, 12.0);
    CHECK(c.value(5.0) == 0.3);
    CHECK(c.derivative(5.0) == 0.0);
    CHECK(c.period() == 12.0);
}

TEST_CASE("signals are periodic", "[signal][property]") {
    for (double w : {0.02, 0.3, 1.0, 7.5}) {
        for (const Signal& s : {Signal::sine(w), Signal::abs_sine(w, 1.5)}) {
            const double T = s.period();
            for (int k = 0; k < 40; ++k) {
                const double t = 0.137 * k / w;
                CHECK(s.value(t + T) == Approx(s.value(t)).margin(1e-12));
                CHECK(s.value(t + 3 * T) == Approx(s.value(t)).margin(1e-11));
            }
        }
    }
}

TEST_CASE("analytic derivative matches central differences away from kinks", "[signal][property]") {
    for (double w : {0.1, 1.0, 3.0}) {
        for (const Signal& s : {Signal::sine(w, 1.3), Signal::abs_sine(w, 0.7)}) {
            for (int k = 1; k < 60; ++k) {
                const double t = 0.0731 * k / w;
                const auto kinks = s.kink_times(t - 1e-4, t + 1e-4);
                if (!kinks.empty()) continue;
                const double h = 1e-6 / w;
                const double fd = (s.value(t + h) - s.value(t - h)) / (2 * h);
                CHECK(s.derivative(t) == Approx(fd).epsilon(1e-6).margin(1e-8));
            }
        }
    }
}

TEST_CASE("kink times", "[signal]") {
    const Signal s = Signal::sine(1.0);
    const auto k = s.kink_times(0.0, 2.0 * std::numbers::pi);
    REQUIRE(k.size() == 2);
    CHECK(k[0] == Approx(std::numbers::pi / 2));
    CHECK(k[1] == Approx(3 * std::numbers::pi / 2));

    const Signal a = Signal::abs_sine(2.0);
    const auto ka = a.kink_times(0.0, std::numbers::pi);
    REQUIRE(ka.size() == 3);  // inclusive at both ends
    CHECK(ka[0] == Approx(0.0).margin(1e-15));
    CHECK(ka[1] == Approx(std::numbers::pi / 2));
    CHECK(ka[2] == Approx(std::numbers::pi));
    CHECK(Signal::constant(1.0, 5.0).kink_times(0.0, 5.0).empty());
    CHECK(s.kink_times(0.1, 0.2).empty());
}

TEST_CASE("abs_sine derivative branch follows the branch time", "[signal]") {
    const Signal a = Signal::abs_sine(1.0);
    const double kink = std::numbers::pi;
    CHECK(a.derivative(0.0) == 0.0);  // sign(0) = 0 at an exact kink
    CHECK(a.derivative_with_branch(kink, kink - 0.01) == Approx(-1.0));
    CHECK(a.derivative_with_branch(kink, kink + 0.01) == Approx(1.0));
}

TEST_CASE("signal validation", "[signal]") {
    CHECK_THROWS_AS(Signal::sine(0.0).validate(), Error);
    CHECK_THROWS_AS(Signal::sine(-1.0).validate(), Error);
    CHECK_THROWS_AS(Signal::constant(1.0, 0.0).validate(), Error);
    CHECK_NOTHROW(Signal::abs_sine(0.01).validate());
    CHECK(parse_signal_kind("abs_sine") == SignalKind::abs_sine);
    CHECK_THROWS_AS(parse_signal_kind("square"), Error);
    CHECK(Signal::sine(0.5).describe() == "sine(A=1, omega=0.5)");
}
