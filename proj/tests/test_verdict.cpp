#include "hysteresis/verdict.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace hysteresis;
using Catch::Approx;

namespace {

std::vector<Point> ellipse(double ru, double rx, int n = 400, double cu = 0.0) {
    std::vector<Point> out;
    for (int i = 0; i < n; ++i) {
        const double a = 2.0 * std::numbers::pi * i / n;
        out.push_back({cu + ru * std::cos(a), rx * std::sin(a)});
    }
    return out;
}

SweepPoint point(double omega, std::vector<Point> ring, double gap = 0.0) {
    SweepPoint p;
    p.omega = omega;
    p.loop = analyze_ring(std::move(ring), gap);
    return p;
}

SweepPoint diverged(double omega) {
    SweepPoint p;
    p.omega = omega;
    p.diverged = true;
    p.loop.unbounded_candidate = true;
    p.loop.closure_gap = INFINITY;
    return p;
}

SweepResult sweep(std::vector<SweepPoint> pts) {
    SweepResult s;
    s.points = std::move(pts);
    return s;
}

// Loops of half-height rx(omega) over omegas 2, 0.5, 0.1, 0.02.
SweepResult scaled(double (*rx)(double)) {
    std::vector<SweepPoint> pts;
    for (double w : {2.0, 0.5, 0.1, 0.02}) pts.push_back(point(w, ellipse(1.0, rx(w))));
    return sweep(pts);
}

}  // namespace

TEST_CASE("decision procedure branches", "[verdict]") {
    SECTION("persistent, omega-independent loop") {
        const auto v = classify(scaled([](double) { return 0.5; }));
        CHECK(v.verdict == Verdict::hysteretic);
        CHECK(v.rate == Rate::independent);
        CHECK(v.area_exponent == Approx(0.0).margin(1e-9));
        CHECK(v.relative_loop_distance < 1e-12);
    }
    SECTION("persistent loop that still changes shape") {
        const auto v = classify(scaled([](double w) { return 0.5 + 2.0 * std::sqrt(w); }));
        CHECK(v.verdict == Verdict::hysteretic);
        CHECK(v.rate == Rate::dependent);
    }
    SECTION("area shrinking to zero") {
        const auto v = classify(scaled([](double w) { return w; }));
        CHECK(v.verdict == Verdict::degenerate);
        CHECK(v.rate == Rate::not_applicable);
    }
    SECTION("area growing like 1/omega") {
        const auto v = classify(scaled([](double w) { return 1.0 / w; }));
        CHECK(v.verdict == Verdict::unbounded);
        CHECK(v.area_exponent == Approx(1.0).epsilon(1e-6));
    }
    SECTION("divergence at some frequency") {
        auto s = scaled([](double) { return 0.5; });
        s.points[3] = diverged(0.02);
        CHECK(classify(s).verdict == Verdict::unbounded);
    }
    SECTION("no closed loop anywhere") {
        std::vector<SweepPoint> pts;
        for (double w : {2.0, 0.5, 0.1}) pts.push_back(point(w, ellipse(1.0, 0.5), 0.3));
        CHECK(classify(sweep(pts)).verdict == Verdict::no_loop);
        std::vector<SweepPoint> all_div{diverged(2.0), diverged(0.5), diverged(0.1)};
        CHECK(classify(sweep(all_div)).verdict == Verdict::no_loop);
    }
    SECTION("small but non-monotone area") {
        std::vector<SweepPoint> pts{point(2.0, ellipse(1, 0.5)), point(0.5, ellipse(1, 0.01)),
                                    point(0.1, ellipse(1, 0.2)), point(0.02, ellipse(1, 0.01))};
        CHECK(classify(sweep(pts)).verdict == Verdict::inconclusive);
    }
    SECTION("smallest frequency not closed") {
        std::vector<SweepPoint> pts{point(2.0, ellipse(1, 0.5)), point(0.5, ellipse(1, 0.5)),
                                    point(0.1, ellipse(1, 0.5)), point(0.02, ellipse(1, 0.5), 0.5)};
        CHECK(classify(sweep(pts)).verdict == Verdict::inconclusive);
    }
    SECTION("too few usable frequencies") {
        std::vector<SweepPoint> pts{point(2.0, ellipse(1, 0.5)), point(0.5, ellipse(1, 0.5))};
        SweepPoint failed;
        failed.omega = 0.1;
        failed.failed = true;
        pts.push_back(failed);
        CHECK(classify(sweep(pts)).verdict == Verdict::inconclusive);
    }
}

TEST_CASE("verdict does not depend on the order of sweep points", "[verdict][property]") {
    std::mt19937 rng(99);
    for (auto rx : {+[](double) { return 0.5; }, +[](double w) { return w; }, +[](double w) { return 1.0 / w; },
                    +[](double w) { return 0.5 + 2.0 * std::sqrt(w); }}) {
        SweepResult s = scaled(rx);
        const HysteresisVerdict base = classify(s);
        for (int k = 0; k < 8; ++k) {
            std::shuffle(s.points.begin(), s.points.end(), rng);
            const HysteresisVerdict v = classify(s);
            CHECK(v.verdict == base.verdict);
            CHECK(v.rate == base.rate);
        }
    }
}

TEST_CASE("thresholds act monotonically", "[verdict][property]") {
    const SweepResult s = scaled([](double w) { return 0.05 + w * 0.5; });
    bool seen_degenerate = false;
    for (double f = 0.0; f <= 1.0; f += 0.02) {
        VerdictThresholds t;
        t.degenerate_fraction = f;
        const Verdict v = classify(s, t).verdict;
        if (seen_degenerate) CHECK(v == Verdict::degenerate);
        seen_degenerate = seen_degenerate || v == Verdict::degenerate;
    }
    CHECK(seen_degenerate);

    const SweepResult r = scaled([](double w) { return 0.5 + 2.0 * std::sqrt(w); });
    bool seen_independent = false;
    for (double th = 0.0; th <= 1.0; th += 0.01) {
        VerdictThresholds t;
        t.rate_threshold = th;
        const Rate rate = classify(r, t).rate;
        if (seen_independent) CHECK(rate == Rate::independent);
        seen_independent = seen_independent || rate == Rate::independent;
    }
    CHECK(seen_independent);
}

TEST_CASE("frequency sweep end to end", "[verdict][sweep]") {
    SweepParams p;
    p.integration.periods = 3;
    p.integration.steps_per_period = 1024;
    p.workers = 1;
    const SweepResult serial = frequency_sweep(preset("folode_a0_abs"), SignalKind::sine, {0.25, 1.0, 0.5}, p);
    REQUIRE(serial.points.size() == 3);
    CHECK(serial.points[0].omega == 1.0);
    CHECK(serial.points[2].omega == 0.25);
    const HysteresisVerdict v = classify(serial);
    CHECK(v.verdict == Verdict::hysteretic);
    CHECK(v.rate == Rate::independent);

    p.workers = 3;
    const SweepResult parallel = frequency_sweep(preset("folode_a0_abs"), SignalKind::sine, {0.25, 1.0, 0.5}, p);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(parallel.points[i].loop.points == serial.points[i].loop.points);
        CHECK(parallel.points[i].loop.geometric_area == serial.points[i].loop.geometric_area);
    }
}

TEST_CASE("sweep input validation", "[verdict][sweep]") {
    const ModelSpec m = preset("cubic");
    CHECK_THROWS_AS(frequency_sweep(m, SignalKind::sine, {1.0, 0.5}), Error);
    CHECK_THROWS_AS(frequency_sweep(m, SignalKind::sine, {1.0, 0.5, 0.5}), Error);
    CHECK_THROWS_AS(frequency_sweep(m, SignalKind::sine, {1.0, 0.5, -0.1}), Error);
    CHECK_THROWS_AS(frequency_sweep(m, SignalKind::constant, {1.0, 0.5, 0.1}), Error);
    CHECK_THROWS_AS(frequency_sweep(build_model(1, "1/u", {0.0}), SignalKind::sine, {1.0, 0.5, 0.1}), SweepFailure);
}

TEST_CASE("jump and fold matching", "[verdict][jumps]") {
    auto with_jumps = [](double omega, std::vector<double> us) {
        SweepPoint p;
        p.omega = omega;
        for (double u : us) p.loop.jumps.push_back({u, 0.0, 1.0, 100.0});
        return p;
    };
    const std::vector<SweepPoint> pts{with_jumps(0.05, {-0.6, 0.62}), with_jumps(0.005, {-0.42, 0.41})};
    const JumpMatchTable t = jump_bifurcation_match(pts, {-0.3849, 0.3849});
    REQUIRE(t.rows.size() == 4);
    CHECK(t.rows[0].bifurcation_u == -0.3849);
    CHECK(t.residual_at_max_omega == Approx(0.62 - 0.3849));
    CHECK(t.residual_at_min_omega == Approx(0.42 - 0.3849));
    CHECK(t.converging);
    CHECK(jump_residual(pts[1].loop, 0.3849) == Approx(0.41 - 0.3849));
    CHECK(std::isinf(jump_residual(SteadyLoop{}, 0.0)));
    CHECK(jump_bifurcation_match(pts, {}).rows.empty());
}
