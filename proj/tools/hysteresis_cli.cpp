// hysteresis: simulate input-driven ODE models and test their loops for hysteresis.

#include "hysteresis/hysteresis.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace hysteresis;

namespace {

enum Exit : int { ok = 0, usage = 1, numerical = 2, io = 3 };

struct Common {
    std::string config_file;
    std::vector<std::string> sets;
    std::string preset;
    std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("-c,--config", c.config_file, "key = value config file");
    cmd->add_option("--set", c.sets, "override a config key (key=value), repeatable")->take_all();
    cmd->add_option("--preset", c.preset, "catalog model name (same as --set preset=NAME)");
    cmd->add_option("-o,--out", c.out, "output directory (same as --set out=DIR)");
}

/// File first, then shortcut flags, then --set entries in order.
RunConfig load(const Common& c, const std::vector<std::pair<std::string, std::string>>& shortcuts = {}) {
    RunConfig cfg;
    if (!c.config_file.empty()) apply_config_text(cfg, read_file(c.config_file));
    if (!c.preset.empty()) cfg.set("preset", c.preset);
    if (!c.out.empty()) cfg.set("out", c.out);
    for (const auto& [k, v] : shortcuts) cfg.set(k, v);
    for (const auto& s : c.sets) {
        const auto [k, v] = split_assignment(s);
        cfg.set(k, v);
    }
    return cfg;
}

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json point_json(const Point& p) { return json::array({num(p.u), num(p.x)}); }

json model_json(const ModelSpec& m) {
    json j;
    j["name"] = m.name;
    j["family"] = family_name(m.family);
    j["order"] = m.order;
    j["rhs"] = to_text(m.rhs);
    j["initial_state"] = m.initial_state;
    j["time_varying"] = m.time_varying;
    j["asymptotic_autonomous"] = m.asymptotic_autonomous;
    if (m.limit_rhs) j["limit_rhs"] = to_text(*m.limit_rhs);
    return j;
}

json config_json(const RunConfig& cfg, SignalKind kind) {
    json j;
    j["signal"] = signal_kind_name(kind);
    j["amplitude"] = cfg.amplitude;
    j["omegas"] = cfg.omegas;
    j["periods"] = cfg.integration.periods;
    j["steps_per_period"] = cfg.integration.steps_per_period;
    j["discard_periods"] = cfg.discard_periods;
    j["split_at_kinks"] = cfg.integration.split_at_kinks;
    j["stability_substeps"] = cfg.integration.stability_substeps;
    j["closure_threshold"] = cfg.loop.closure_threshold;
    j["slope_threshold"] = cfg.loop.jumps.slope_threshold;
    j["jump_height_fraction"] = cfg.loop.jumps.jump_height_fraction;
    j["degenerate_fraction"] = cfg.thresholds.degenerate_fraction;
    j["unbounded_exponent"] = cfg.thresholds.unbounded_exponent;
    j["rate_threshold"] = cfg.thresholds.rate_threshold;
    j["fit_points"] = cfg.thresholds.fit_points;
    return j;
}

json loop_json(const SteadyLoop& loop) {
    json j;
    j["closed"] = loop.closed;
    j["unbounded_candidate"] = loop.unbounded_candidate;
    j["closure_gap"] = num(loop.closure_gap);
    j["signed_area"] = num(loop.signed_area);
    j["geometric_area"] = num(loop.geometric_area);
    j["diameter"] = num(loop.diameter);
    j["pinch_count"] = loop.pinch_points.size();
    json pinches = json::array();
    for (const Point& p : loop.pinch_points) pinches.push_back(point_json(p));
    j["pinch_points"] = pinches;
    json jumps = json::array();
    for (const JumpEvent& e : loop.jumps) {
        jumps.push_back({{"u_at_jump", num(e.u_at_jump)},
                         {"x_before", num(e.x_before)},
                         {"x_after", num(e.x_after)},
                         {"max_slope", num(e.max_slope)}});
    }
    j["jumps"] = jumps;
    return j;
}

void print_loop_summary(const SteadyLoop& loop) {
    std::printf("closed=%s gap=%.4g signed_area=%.6g geometric_area=%.6g diameter=%.6g pinches=%zu jumps=%zu\n",
                loop.closed ? "yes" : "no", loop.closure_gap, loop.signed_area, loop.geometric_area, loop.diameter,
                loop.pinch_points.size(), loop.jumps.size());
    for (const JumpEvent& e : loop.jumps) {
        std::printf("  jump at u=%.6g: x %.6g -> %.6g\n", e.u_at_jump, e.x_before, e.x_after);
    }
}

// -----------------------------------------------------------------------------

int cmd_list_presets() {
    std::printf("%-22s %-22s %-5s %s\n", "name", "family", "order", "equation");
    for (const PresetInfo& p : preset_catalog()) {
        std::printf("%-22s %-22s %-5d %s\n", p.name.c_str(), std::string(family_name(p.family)).c_str(), p.order,
                    p.description.c_str());
    }
    return ok;
}

int cmd_simulate(const RunConfig& cfg) {
    const ModelSpec model = cfg.model();
    const Signal signal = cfg.make_signal(model);
    const Trajectory traj = integrate(model, signal, cfg.integration);
    const fs::path dir = cfg.out;
    write_file_atomic(dir / "trajectory.csv", trajectory_csv(traj));
    write_file_atomic(dir / "io_curve.csv", io_curve_csv(to_io_curve(traj)));
    double lo = traj.states.front()[0], hi = lo;
    for (const State& s : traj.states) {
        lo = std::min(lo, s[0]);
        hi = std::max(hi, s[0]);
    }
    std::printf("%s under %s: %zu samples, x1 in [%.6g, %.6g]%s\n", model.name.c_str(), traj.signal_description.c_str(),
                traj.size(), lo, hi, traj.diverged ? " (diverged)" : "");
    return traj.diverged ? numerical : ok;
}

int cmd_equilibria(const RunConfig& cfg) {
    const ModelSpec model = cfg.model();
    const EquilibriumReport r = find_equilibria(model, cfg.U, cfg.equilibrium_options());
    write_file_atomic(fs::path(cfg.out) / "equilibria.csv", equilibria_csv(r));
    if (r.continuum) {
        std::printf("U=%.10g: continuum of equilibria (%s while the input moves)\n", r.U,
                    std::string(stability_name(r.continuum_stability)).c_str());
        return ok;
    }
    std::printf("U=%.10g: %zu equilibria, %d stable%s\n", r.U, r.equilibria.size(), r.stable_count(),
                r.multistable ? " (multistable)" : "");
    for (const Equilibrium& e : r.equilibria) {
        std::printf("  x1=%.12g  %s\n", e.state[0], std::string(stability_name(e.stability)).c_str());
    }
    return ok;
}

int cmd_bifurcations(const RunConfig& cfg) {
    const ModelSpec model = cfg.model();
    const BifurcationSet set = solve_bifurcations(model, cfg.bifurcation_options());
    write_file_atomic(fs::path(cfg.out) / "bifurcations.csv", bifurcations_csv(set));
    std::printf("%zu fold points (%d seeds, %d converged)\n", set.points.size(), set.seeds_tried, set.seeds_converged);
    for (const BifurcationPoint& p : set.points) std::printf("  U=%.12g  x=%.12g\n", p.U, p.x);
    return ok;
}

int cmd_diagram(const RunConfig& cfg) {
    const ModelSpec model = cfg.model();
    Interval range = model.bifurcation_u_range;
    if (cfg.bif_u_lo && cfg.bif_u_hi) range = {*cfg.bif_u_lo, *cfg.bif_u_hi};
    const BifurcationDiagram d = bifurcation_diagram(model, range, cfg.diagram_n, cfg.equilibrium_options());
    write_file_atomic(fs::path(cfg.out) / "diagram.csv", diagram_csv(d));
    std::printf("%zu rows over U in [%.6g, %.6g]", d.rows.size(), range.lo, range.hi);
    if (!d.continuum_at.empty()) std::printf(", continuum at %zu samples", d.continuum_at.size());
    std::printf("\n");
    return ok;
}

int cmd_hysteresis(const RunConfig& cfg) {
    const ModelSpec model = cfg.model();
    const SignalKind kind = cfg.signal_kind(model);
    const SweepResult sweep = frequency_sweep(model, kind, cfg.omegas, cfg.sweep_params());
    const HysteresisVerdict verdict = classify(sweep, cfg.thresholds);
    const fs::path dir = cfg.out;

    json report;
    report["model"] = model_json(model);
    report["config"] = config_json(cfg, kind);

    json points = json::array();
    for (std::size_t i = 0; i < sweep.points.size(); ++i) {
        const SweepPoint& p = sweep.points[i];
        json j;
        j["omega"] = p.omega;
        j["diverged"] = p.diverged;
        j["failed"] = p.failed;
        if (p.failed) j["error"] = p.error;
        j["loop"] = loop_json(p.loop);
        if (!p.loop.points.empty()) {
            const std::string stem = "loop_w" + std::to_string(i);
            write_file_atomic(dir / (stem + ".csv"), loop_csv(p.loop.points));
            j["loop_csv"] = stem + ".csv";
            if (cfg.svg) {
                char title[128];
                std::snprintf(title, sizeof title, "%s, omega = %.6g", model.name.c_str(), p.omega);
                write_file_atomic(dir / (stem + ".svg"), loop_svg(p.loop.points, title));
                j["loop_svg"] = stem + ".svg";
            }
        }
        points.push_back(j);
    }
    report["sweep"] = points;

    json v;
    v["verdict"] = verdict_name(verdict.verdict);
    v["rate"] = rate_name(verdict.rate);
    v["area_exponent"] = num(verdict.area_exponent);
    v["relative_loop_distance"] = num(verdict.relative_loop_distance);
    v["reason"] = verdict.reason;
    report["verdict"] = v;

    json ms;
    try {
        std::vector<double> us;
        const Interval r = model.bifurcation_u_range;
        for (int i = 0; i <= 20; ++i) us.push_back(r.lo + (r.hi - r.lo) * i / 20.0);
        const MultistabilityVerdict m = multistability_check(model, us, cfg.equilibrium_options());
        ms["hysteresis_impossible"] = m.hysteresis_impossible;
        ms["rule"] = rule_name(m.rule);
        ms["explanation"] = m.explanation;
    } catch (const AnalysisRefused& e) {
        ms["refused"] = e.code();
        ms["explanation"] = e.what();
    }
    report["multistability"] = ms;

    json bif;
    try {
        const BifurcationSet set = solve_bifurcations(model, cfg.bifurcation_options());
        const std::vector<double> values = set.values();
        bif["values"] = values;
        const JumpMatchTable table = jump_bifurcation_match(sweep.points, values);
        json rows = json::array();
        for (const JumpMatch& m : table.rows) {
            rows.push_back({{"omega", m.omega},
                            {"u_at_jump", num(m.u_at_jump)},
                            {"bifurcation_u", num(m.bifurcation_u)},
                            {"residual", num(m.residual)}});
        }
        bif["jump_match"] = rows;
        bif["converging"] = table.converging;
    } catch (const AnalysisRefused& e) {
        bif["refused"] = e.code();
        bif["explanation"] = e.what();
    }
    report["bifurcations"] = bif;

    write_file_atomic(dir / "report.json", report.dump(2) + "\n");

    std::printf("%s: %s", model.name.c_str(), std::string(verdict_name(verdict.verdict)).c_str());
    if (verdict.verdict == Verdict::hysteretic) std::printf(", rate %s", std::string(rate_name(verdict.rate)).c_str());
    std::printf(" (%s)\n", verdict.reason.c_str());
    for (const SweepPoint& p : sweep.points) {
        std::printf("  omega=%-8.4g ", p.omega);
        if (p.failed) {
            std::printf("failed: %s\n", p.error.c_str());
            continue;
        }
        print_loop_summary(p.loop);
    }
    const bool all_bad = std::all_of(sweep.points.begin(), sweep.points.end(),
                                     [](const SweepPoint& p) { return p.failed || p.diverged; });
    return all_bad ? numerical : ok;
}

int cmd_analyze_loop(const RunConfig& cfg) {
    if (cfg.loop_csv.empty()) throw ConfigError("analyze-loop needs 'loop_csv'");
    const std::vector<Point> ring = parse_loop_csv(read_file(cfg.loop_csv));
    if (ring.size() < 3) throw ConfigError("loop CSV needs at least 3 points");
    const SteadyLoop loop = analyze_ring(ring, -1.0, cfg.loop);
    json report = loop_json(loop);
    report["source"] = cfg.loop_csv;
    report["points"] = ring.size();
    write_file_atomic(fs::path(cfg.out) / "loop_report.json", report.dump(2) + "\n");
    print_loop_summary(loop);
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulate input-driven ODE models and test their input-output loops for hysteresis"};
    app.require_subcommand(1);

    Common sim_c, eq_c, bif_c, dia_c, hys_c, an_c;
    std::string omega, U, loop_file;

    CLI::App* list = app.add_subcommand("list-presets", "print the model catalog");
    CLI::App* sim = app.add_subcommand("simulate", "integrate one run; writes trajectory.csv and io_curve.csv");
    add_common(sim, sim_c);
    sim->add_option("--omega", omega, "input frequency (same as --set omega=W)");
    CLI::App* eq = app.add_subcommand("equilibria", "equilibria of the frozen system; writes equilibria.csv");
    add_common(eq, eq_c);
    eq->add_option("--U", U, "frozen input value (same as --set U=V)");
    CLI::App* bif = app.add_subcommand("bifurcations", "fold points; writes bifurcations.csv");
    add_common(bif, bif_c);
    CLI::App* dia = app.add_subcommand("diagram", "equilibria over a U grid; writes diagram.csv");
    add_common(dia, dia_c);
    CLI::App* hys = app.add_subcommand("hysteresis", "frequency sweep and verdict; writes report.json and loops");
    add_common(hys, hys_c);
    CLI::App* an = app.add_subcommand("analyze-loop", "metrics of a saved loop CSV; writes loop_report.json");
    add_common(an, an_c);
    an->add_option("loop_csv", loop_file, "loop CSV with header u,x");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage;
    }

    try {
        if (list->parsed()) return cmd_list_presets();
        if (sim->parsed()) {
            std::vector<std::pair<std::string, std::string>> s;
            if (!omega.empty()) s.emplace_back("omega", omega);
            return cmd_simulate(load(sim_c, s));
        }
        if (eq->parsed()) {
            std::vector<std::pair<std::string, std::string>> s;
            if (!U.empty()) s.emplace_back("U", U);
            return cmd_equilibria(load(eq_c, s));
        }
        if (bif->parsed()) return cmd_bifurcations(load(bif_c));
        if (dia->parsed()) return cmd_diagram(load(dia_c));
        if (hys->parsed()) return cmd_hysteresis(load(hys_c));
        if (an->parsed()) {
            std::vector<std::pair<std::string, std::string>> s;
            if (!loop_file.empty()) s.emplace_back("loop_csv", loop_file);
            return cmd_analyze_loop(load(an_c, s));
        }
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return io;
    } catch (const IntegrationError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return numerical;
    } catch (const SweepFailure& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return numerical;
    } catch (const std::filesystem::filesystem_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return io;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return usage;
    }
    return usage;
}
