#include "hysteresis/equilibrium.hpp"
#include "hysteresis/integrator.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

using namespace hysteresis;
using Catch::Approx;

namespace {

// Plain bisection, independent of the library's root finder.
double bisect_oracle(double (*f)(double), double lo, double hi) {
    double flo = f(lo);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

std::vector<double> xs(const EquilibriumReport& r) {
    std::vector<double> out;
    for (const auto& e : r.equilibria) out.push_back(e.state[0]);
    return out;
}

std::vector<Stability> labels(const EquilibriumReport& r) {
    std::vector<Stability> out;
    for (const auto& e : r.equilibria) out.push_back(e.stability);
    return out;
}

}  // namespace

TEST_CASE("budworm equilibria at U = 0.52", "[equilibrium][oracle]") {
    const EquilibriumReport r = find_equilibria(preset("budworm"), 0.52);
    REQUIRE(r.equilibria.size() == 4);
    const std::vector<double> expected{0.0, 0.9715485792, 1.123426650, 22.90502477};
    for (std::size_t i = 0; i < 4; ++i) CHECK(r.equilibria[i].state[0] == Approx(expected[i]).margin(1e-6));
    CHECK(labels(r) == std::vector<Stability>{Stability::unstable, Stability::stable, Stability::unstable,
                                              Stability::stable});
    CHECK(r.multistable);
    CHECK(r.stable_count() == 2);
}

TEST_CASE("cubic equilibria", "[equilibrium][oracle]") {
    const ModelSpec m = preset("cubic");
    const EquilibriumReport r0 = find_equilibria(m, 0.0);
    REQUIRE(r0.equilibria.size() == 3);
    CHECK(r0.equilibria[0].state[0] == Approx(-1.0).margin(1e-12));
    CHECK(r0.equilibria[1].state[0] == Approx(0.0).margin(1e-12));
    CHECK(r0.equilibria[2].state[0] == Approx(1.0).margin(1e-12));
    CHECK(labels(r0) == std::vector<Stability>{Stability::stable, Stability::unstable, Stability::stable});

    const EquilibriumReport r1 = find_equilibria(m, 1.0);
    REQUIRE(r1.equilibria.size() == 1);
    const double oracle = bisect_oracle([](double x) { return x * x * x - x - 1.0; }, 1.0, 2.0);
    CHECK(std::fabs(r1.equilibria[0].state[0] - oracle) < 1e-8);
    CHECK(r1.equilibria[0].stability == Stability::stable);
    CHECK_FALSE(r1.multistable);
}

TEST_CASE("second-order equilibria use the Jacobian eigenvalues", "[equilibrium]") {
    const EquilibriumReport r = find_equilibria(preset("pendulum_like"), 0.0);
    REQUIRE(r.equilibria.size() == 3);
    CHECK(r.equilibria[0].state[0] == Approx(-std::numbers::pi));
    CHECK(r.equilibria[1].state[0] == Approx(0.0).margin(1e-12));
    CHECK(labels(r) == std::vector<Stability>{Stability::unstable, Stability::stable, Stability::unstable});
    CHECK(r.equilibria[1].state[1] == 0.0);
    CHECK(r.equilibria[1].eig1.imag() != 0.0);  // underdamped focus
    CHECK(r.equilibria[1].eig1.real() == Approx(-0.5));
}

TEST_CASE("touching roots are found", "[equilibrium]") {
    const ModelSpec m = build_model(1, "-(x - 1)^2*(x + 2) + u", {0.0});
    const EquilibriumReport r = find_equilibria(m, 0.0, EquilibriumOptions{Interval{-4.0, 4.0}, 4000});
    REQUIRE(r.equilibria.size() == 2);
    CHECK(r.equilibria[1].state[0] == Approx(1.0).margin(1e-6));
    CHECK(r.equilibria[1].stability == Stability::marginal);
}

TEST_CASE("continua of equilibria", "[equilibrium]") {
    const EquilibriumReport c = find_equilibria(preset("cubic_continuum"), 0.2);
    CHECK(c.continuum);
    CHECK(c.equilibria.empty());
    CHECK(c.multistable);
    const EquilibriumReport d = find_equilibria(preset("duhem", {{"alpha", "-1"}}), 0.0);
    CHECK(d.continuum);
    CHECK(d.continuum_stability == Stability::unstable);
    CHECK_FALSE(d.multistable);
    CHECK(find_equilibria(preset("duhem"), 0.0).continuum_stability == Stability::stable);
}

TEST_CASE("time-varying frozen systems are refused", "[equilibrium]") {
    CHECK_THROWS_AS(find_equilibria(preset("folode_t"), 0.0), AnalysisRefused);
    CHECK_NOTHROW(find_equilibria(preset("folode_exp"), 0.0));
    CHECK_THROWS_AS(solve_bifurcations(preset("folode_t")), AnalysisRefused);
}

TEST_CASE("fold points", "[equilibrium][bifurcation][oracle]") {
    const double fold = 2.0 / (3.0 * std::sqrt(3.0));
    const std::vector<double> cubic = solve_bifurcations(preset("cubic")).values();
    REQUIRE(cubic.size() == 2);
    CHECK(std::fabs(cubic[0] + fold) < 1e-10);
    CHECK(std::fabs(cubic[1] - fold) < 1e-10);

    const std::vector<double> bud = solve_bifurcations(preset("budworm")).values();
    REQUIRE(bud.size() == 3);
    CHECK(bud[0] == Approx(0.0).margin(1e-6));
    CHECK(bud[1] == Approx(0.1589759579).margin(1e-6));
    CHECK(bud[2] == Approx(0.5213066729).margin(1e-6));

    const std::vector<double> s15 = solve_bifurcations(preset("sonode15")).values();
    REQUIRE(s15.size() == 2);
    CHECK(s15[0] == Approx(0.0).margin(1e-9));
    CHECK(s15[1] == Approx(4.0 / 27.0).margin(1e-9));

    const std::vector<double> s35 = solve_bifurcations(preset("sonode35")).values();
    REQUIRE(s35.size() == 3);
    CHECK(s35[0] == Approx(-0.01243505829).margin(1e-6));
    CHECK(s35[1] == Approx(0.0).margin(1e-6));
    CHECK(s35[2] == Approx(0.09004734629).margin(1e-6));
}

TEST_CASE("fold points satisfy f = f_x = 0", "[equilibrium][bifurcation]") {
    for (const char* name : {"cubic", "budworm", "sonode15", "sonode35", "pendulum_like"}) {
        const BifurcationSet set = solve_bifurcations(preset(name));
        for (const auto& p : set.points) {
            INFO(name << " U=" << p.U << " x=" << p.x);
            CHECK(std::fabs(p.residual_f) < 1e-9);
            CHECK(std::fabs(p.residual_fx) < 1e-9);
        }
    }
}

TEST_CASE("bifurcation diagram rows follow the equilibria", "[equilibrium][bifurcation]") {
    const BifurcationDiagram d = bifurcation_diagram(preset("cubic"), Interval{-1.0, 1.0}, 101);
    int at_zero = 0;
    for (const auto& row : d.rows) {
        if (std::fabs(row.U) < 1e-12) ++at_zero;
    }
    CHECK(at_zero == 3);
    CHECK(d.continuum_at.empty());
    CHECK_THROWS_AS(bifurcation_diagram(preset("cubic"), Interval{-1.0, 1.0}, 10), Error);
}

TEST_CASE("stability alternates between simple roots", "[equilibrium][property]") {
    std::mt19937 rng(20240611);
    std::uniform_real_distribution<double> root(-3.0, 3.0);
    std::uniform_int_distribution<int> degree(1, 5);
    std::uniform_real_distribution<double> scale(0.2, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = degree(rng);
        std::vector<double> roots;
        while (static_cast<int>(roots.size()) < n) {
            const double r = root(rng);
            if (std::all_of(roots.begin(), roots.end(), [&](double q) { return std::fabs(q - r) > 0.05; })) {
                roots.push_back(r);
            }
        }
        std::sort(roots.begin(), roots.end());
        const double k = (trial % 2 == 0 ? 1.0 : -1.0) * scale(rng);
        std::ostringstream text;
        text.precision(17);
        text << k;
        for (double r : roots) text << "*(x - (" << r << "))";
        text << " + 0*u";
        const ModelSpec m = build_model(1, text.str(), {0.0});
        const EquilibriumReport rep = find_equilibria(m, 0.0, EquilibriumOptions{Interval{-3.5, 3.5}, 4000});
        INFO(text.str());
        REQUIRE(rep.equilibria.size() == roots.size());
        for (std::size_t i = 0; i < roots.size(); ++i) {
            CHECK(rep.equilibria[i].state[0] == Approx(roots[i]).margin(1e-9));
            CHECK(rep.equilibria[i].stability != Stability::marginal);
            if (i > 0) CHECK(rep.equilibria[i].stability != rep.equilibria[i - 1].stability);
        }
        // the rightmost root is stable exactly when f decreases through it
        CHECK((rep.equilibria.back().stability == Stability::stable) == (k < 0));
    }
}

TEST_CASE("classification agrees with perturbed simulations", "[equilibrium][property]") {
    constexpr double delta = 1e-4;
    int checked = 0;
    for (const PresetInfo& info : preset_catalog()) {
        ModelSpec m = preset(info.name);
        m.rhs = analysis_rhs(m);
        if (m.rhs.references(Var::t)) continue;
        const Interval range = m.bifurcation_u_range;
        for (int k = 0; k <= 4; ++k) {
            const double U = range.lo + (range.hi - range.lo) * (0.1 + 0.2 * k);
            const EquilibriumReport rep = find_equilibria(m, U);
            for (const Equilibrium& eq : rep.equilibria) {
                if (eq.stability == Stability::marginal) continue;
                // slowest decay (stable) or the growth rate (unstable) sets the horizon
                const double re1 = eq.eig1.real(), re2 = eq.eig2.real();
                double rate = std::fabs(eq.fx);
                if (m.order == 2) {
                    rate = eq.stability == Stability::stable ? std::min(-re1, -re2) : std::max(re1, re2);
                }
                const double horizon = std::clamp(12.0 / std::max(rate, 1e-3), 10.0, 2000.0);
                for (double sgn : {-1.0, 1.0}) {
                    ModelSpec p = m;
                    p.initial_state[0] = eq.state[0] + sgn * delta;
                    if (m.order == 2) p.initial_state[1] = 0.0;
                    const Trajectory traj = integrate(p, Signal::constant(U, horizon), 1, 20000);
                    const double end = traj.diverged ? INFINITY : std::fabs(traj.states.back()[0] - eq.state[0]);
                    INFO(info.name << " U=" << U << " x=" << eq.state[0] << " rate=" << rate << " end=" << end);
                    if (eq.stability == Stability::stable) {
                        CHECK(end < 0.1 * delta);
                    } else {
                        CHECK(end > 1e-2);
                    }
                    ++checked;
                }
            }
        }
    }
    CHECK(checked > 40);
}

TEST_CASE("multistability check", "[equilibrium][impossibility]") {
    const std::vector<double> us{-0.5, -0.25, 0.0, 0.25, 0.5};
    const auto const_a = multistability_check(preset("folode_const_a"), us);
    CHECK(const_a.hysteresis_impossible);
    CHECK(const_a.rule == ImpossibilityRule::constant_linear_coefficient);

    const auto cubic = multistability_check(preset("cubic"), us);
    CHECK_FALSE(cubic.hysteresis_impossible);

    const auto duhem_neg = multistability_check(preset("duhem", {{"alpha", "-1"}}), us);
    CHECK(duhem_neg.hysteresis_impossible);
    CHECK(duhem_neg.rule == ImpossibilityRule::unstable_continuum);

    const auto solode = multistability_check(preset("solode"), us);
    CHECK(solode.hysteresis_impossible);
    CHECK(solode.rule == ImpossibilityRule::constant_stiffness);

    const auto anti_damped = multistability_check(preset("duhem2d", {{"p", "exp(-t) - 0.5"}}), us);
    CHECK(anti_damped.hysteresis_impossible);
    CHECK(anti_damped.rule == ImpossibilityRule::negative_damping);

    const auto d2 = multistability_check(preset("duhem2d", {{"alpha", "2"}, {"gamma", "0.3"}}), us);
    CHECK(d2.hysteresis_impossible == false);

    const auto lin = multistability_check(build_model(1, "-x + u", {0.0}), us);
    CHECK(lin.hysteresis_impossible);
    CHECK(lin.rule == ImpossibilityRule::fewer_than_two_stable);

    CHECK_THROWS_AS(multistability_check(preset("folode_t"), us), AnalysisRefused);
}
