// Command-line front end: scenario-driven simulation and verification of the
// tank-liquid system under the LgV feedback.
//
// Exit codes: 0 pass, 1 usage/parse, 2 infeasible parameters, 3 divergence,
// 4 verification failure.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include "svinvopt/scenario.hpp"

using namespace svinvopt;

namespace {

unsigned long long seed_from_env(unsigned long long fallback) {
    const char* env = std::getenv("SVINVOPT_SEED");
    if (!env || !*env) return fallback;
    try {
        return std::stoull(env, nullptr, 0);
    } catch (const std::exception&) {
        throw ScenarioError("SVINVOPT_SEED is not a number: " + std::string(env));
    }
}

int cmd_gamma_star(const PhysicalParams& phys, double r, double k, double Q) {
    const double margin = assumption_A_margin(phys, r, k, Q);
    if (!(margin > 0.0)) {
        std::printf("assumption_A_margin = %.12f\n", margin);
        std::fprintf(stderr,
                     "infeasible: assumption (A) is violated (k^3 Q exceeds the bound); "
                     "gamma* is undefined\n");
        return 2;
    }
    const double gs = gamma_star(phys, r, k, Q);
    std::printf("gamma_star = %.12f\n", gs);
    std::printf("assumption_A_margin = %.12f\n", margin);
    return 0;
}

Trajectory run_scenario(const Scenario& sc, double feedback_scale) {
    const SystemState init = initial_state(sc);
    if (sc.input)
        return simulate_open_loop(sc.phys, init, *sc.input, sc.T, sc.dt_out, &sc.ctrl);
    SimOptions opt;
    opt.dt = sc.dt;
    opt.method = sc.method;
    opt.dt_out = sc.dt_out;
    opt.feedback_scale = feedback_scale;
    return simulate_closed_loop(sc.phys, sc.ctrl, init, sc.T, opt);
}

int cmd_simulate(const std::string& path) {
    const Scenario sc = load_scenario(path);
    const Trajectory traj = run_scenario(sc, 1.0);
    const std::string csv = sc.csv_path.empty() ? "trajectory.csv" : sc.csv_path;
    const std::string json = sc.json_path.empty() ? "summary.json" : sc.json_path;
    write_trajectory_csv(csv, traj, sc);
    atomic_write(json, summary_json_text(sc, traj));
    std::printf("wrote %s and %s (%zu samples)\n", csv.c_str(), json.c_str(), traj.size());
    return 0;
}

InputSignal random_open_loop_input(unsigned long long seed, double T) {
    Rng rng(seed);
    InputSignal sig;
    for (int i = 0; i < 10; ++i) {
        sig.breakpoints.push_back(T * i / 10.0);
        sig.values.push_back(rng.uniform(-1.0, 1.0));
    }
    return sig;
}

int cmd_verify(const std::string& path, bool sabotage) {
    Scenario sc = load_scenario(path);
    sc.seed = seed_from_env(sc.seed);
    std::vector<std::string> checks =
        sc.checks.empty() ? valid_check_names() : sc.checks;
    const double feedback_scale = sabotage ? -1.0 : 1.0;
    const SystemState init = initial_state(sc);

    std::vector<VerificationReport> reports;
    Trajectory base;  // shared closed-loop run
    bool base_ready = false;
    auto ensure_base = [&]() {
        if (base_ready) return;
        SimOptions opt;
        opt.dt = sc.dt;
        opt.method = sc.method;
        opt.dt_out = sc.dt_out;
        opt.feedback_scale = feedback_scale;
        base = simulate_closed_loop(sc.phys, sc.ctrl, init, sc.T, opt);
        base_ready = true;
    };

    for (const std::string& name : checks) {
        if (name == "value_identity") {
            ensure_base();
            reports.push_back(check_value_identity(base, sc.ctrl, sc.phys));
        } else if (name == "energy_identity") {
            const double T_open = std::min(sc.T, 5.0);
            const InputSignal sig = sc.input ? *sc.input
                                             : random_open_loop_input(sc.seed, T_open);
            const Trajectory open = simulate_open_loop(sc.phys, init, sig, T_open,
                                                       std::min(sc.dt_out, 5e-3));
            for (double r : {-0.5, 0.0, 1.0, 2.0}) {
                VerificationReport rep = check_energy_identity(open, r, sc.phys);
                rep.check_name += "_r" + std::to_string(r).substr(0, 4);
                reports.push_back(std::move(rep));
            }
        } else if (name == "decay") {
            ensure_base();
            const DecayReport v =
                check_decay(base.times, base.V_series, SeriesKind::V_weak, "V");
            const std::vector<double> weak = weak_norm_series(base);
            const DecayReport wk =
                check_decay(base.times, weak, SeriesKind::V_weak, "weak_norm");
            const std::vector<double> strong = strong_norm_series(base);
            const DecayReport st =
                check_decay(base.times, strong, SeriesKind::strong_norm, "strong_norm");
            for (const DecayReport* d : {&v, &wk, &st}) {
                VerificationReport rep = make_report(
                    "decay_" + d->series_name,
                    d->reached_zero ? -1.0 : -d->fitted_rate, 0.0,
                    {{"fitted_rate", std::to_string(d->fitted_rate)},
                     {"envelope_constant", std::to_string(d->envelope_constant)}});
                reports.push_back(std::move(rep));
            }
        } else if (name == "inverse_optimality") {
            const double gs = gamma_star(sc.phys, sc.ctrl.r, sc.ctrl.k, sc.ctrl.Q);
            if (!(sc.ctrl.gamma > gs))
                throw InfeasibleParams(
                    "inverse_optimality requires gamma > gamma* (coercive cost); "
                    "gamma/gamma* = " + std::to_string(sc.ctrl.gamma / gs));
            Rng rng(sc.seed);
            const std::vector<InputSignal> perts = random_perturbations(
                rng, sc.inverse_optimality_draws, sc.T / 4.0, 4, 1.0);
            InverseOptimalityOptions opt;
            opt.horizon = sc.T;
            reports.push_back(check_inverse_optimality(sc.phys, sc.ctrl, init, perts, opt));
        } else if (name == "mode_energy_envelope") {
            ensure_base();
            for (int n = 1; n <= std::min(4, sc.m); ++n)
                reports.push_back(check_mode_energy_envelope(base, sc.phys, n));
        } else if (name == "gain_margins") {
            std::vector<double> gammas;
            if (sc.ctrl.Q > 0.0) {
                const double gs = gamma_star(sc.phys, sc.ctrl.r, sc.ctrl.k, sc.ctrl.Q);
                gammas = {0.6 * gs, gs, 10.0 * gs, 100.0 * gs};
            } else {
                gammas = {1.1, 2.0, 10.0};
            }
            GainMarginOptions opt;
            opt.horizon = std::min(sc.T, 12.0);
            auto reps = check_gain_margins(sc.phys, sc.ctrl.r, sc.ctrl.k, sc.ctrl.Q,
                                           init, gammas, opt);
            for (auto& rep : reps) reports.push_back(std::move(rep));
        }
    }

    bool all_passed = true;
    for (const VerificationReport& rep : reports) {
        all_passed = all_passed && rep.passed;
        std::printf("[%s] %-28s residual=%.3e tolerance=%.3e\n",
                    rep.passed ? "PASS" : "FAIL", rep.check_name.c_str(), rep.residual,
                    rep.tolerance);
    }
    if (!sc.json_path.empty()) atomic_write(sc.json_path, reports_json_text(sc, reports));
    return all_passed ? 0 : 4;
}

int cmd_sweep(const PhysicalParams& phys, double r, double k, double Q, int m,
              double gamma_min, double gamma_max, int points, bool multiples, double T,
              double dt, const std::string& preset, double amplitude,
              const std::string& out) {
    std::string csv = "# schema=1\ngamma,spectral_abscissa,A_min,fitted_rate\n";
    if (points > 0) {
        double scale = 1.0;
        if (multiples) {
            const double margin = assumption_A_margin(phys, r, k, Q);
            if (!(margin > 0.0)) {
                std::fprintf(stderr, "infeasible: gamma* undefined (margin %.6f)\n",
                             margin);
                return 2;
            }
            scale = gamma_star(phys, r, k, Q);
        }
        Scenario sc;
        sc.phys = phys;
        sc.m = m;
        sc.init.preset = preset;
        sc.init.amplitude = amplitude;
        const SystemState init = initial_state(sc);
        for (int i = 0; i < points; ++i) {
            const double frac =
                (points == 1) ? 0.0 : static_cast<double>(i) / (points - 1);
            const double gamma = scale * (gamma_min + frac * (gamma_max - gamma_min));
            ControllerParams ctrl{gamma, r, k, Q};
            const double absc = spectral_abscissa(closed_loop_matrix(phys, ctrl, m));
            const double amin = coercivity_margin(phys, ctrl, m).A_min;
            SimOptions opt;
            opt.dt = dt;
            opt.method = Method::expm;
            const Trajectory traj = simulate_closed_loop(phys, ctrl, init, T, opt);
            const DecayReport dec =
                check_decay(traj.times, traj.V_series, SeriesKind::V_weak, "V");
            char row[160];
            std::snprintf(row, sizeof(row), "%.17g,%.17g,%.17g,%.17g\n", gamma, absc,
                          amin, dec.reached_zero ? std::numeric_limits<double>::infinity()
                                                 : dec.fitted_rate);
            csv += row;
        }
    }
    atomic_write(out, csv);
    std::printf("wrote %s\n", out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "svinvopt: spectral-Galerkin simulation and verification of the "
        "tank-liquid system under inverse-optimal LgV boundary feedback"};
    app.require_subcommand(1);

    PhysicalParams phys;
    double r = 1.0, k = 1.0, Q = 0.1;

    auto add_param_flags = [&](CLI::App* cmd) {
        cmd->add_option("--sigma", phys.sigma, "surface tension > 0")->required();
        cmd->add_option("--mu", phys.mu, "viscosity > 0")->required();
        cmd->add_option("--kappa", phys.kappa, "wall friction >= 0")->required();
        cmd->add_option("--r", r, "cost weight r > 0")->required();
        cmd->add_option("--k", k, "feedback gain k > 0")->required();
        cmd->add_option("--Q", Q, "liquid cost weight Q >= 0")->required();
    };

    CLI::App* gs = app.add_subcommand(
        "gamma-star", "Print the critical gain gamma* and the assumption-(A) margin");
    add_param_flags(gs);

    std::string scenario_path;
    CLI::App* sim = app.add_subcommand(
        "simulate", "Run a scenario file; write the CSV trajectory and JSON summary");
    sim->add_option("scenario", scenario_path, "scenario file")->required();

    bool sabotage = false;
    CLI::App* ver = app.add_subcommand(
        "verify", "Run the scenario's verification checks; nonzero exit on failure");
    ver->add_option("scenario", scenario_path, "scenario file")->required();
    ver->add_flag("--sabotage-feedback-sign", sabotage,
                  "debug: flip the applied feedback sign (negative control)")
        ->group("");  // hidden

    int m = 16, points = 20;
    double gamma_min = 0.6, gamma_max = 10.0, T = 12.0, dt = 1e-2, amplitude = 1.0;
    bool multiples = false;
    std::string preset = "mixed", out = "sweep.csv";
    CLI::App* sw = app.add_subcommand(
        "sweep",
        "Sweep gamma; CSV columns: gamma, spectral_abscissa, A_min, fitted_rate");
    add_param_flags(sw);
    sw->add_option("--m", m, "truncation order");
    sw->add_option("--gamma-min", gamma_min, "lowest gamma")->required();
    sw->add_option("--gamma-max", gamma_max, "highest gamma")->required();
    sw->add_option("--points", points, "row count (0: header only)")->required();
    sw->add_flag("--multiples-of-gamma-star", multiples,
                 "interpret the range as multiples of gamma*");
    sw->add_option("--T", T, "decay-fit horizon");
    sw->add_option("--dt", dt, "integration step");
    sw->add_option("--preset", preset, "initial-condition preset");
    sw->add_option("--amplitude", amplitude, "initial-condition amplitude");
    sw->add_option("--out", out, "output CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (gs->parsed()) return cmd_gamma_star(phys, r, k, Q);
        if (sim->parsed()) return cmd_simulate(scenario_path);
        if (ver->parsed()) return cmd_verify(scenario_path, sabotage);
        if (sw->parsed())
            return cmd_sweep(phys, r, k, Q, m, gamma_min, gamma_max, points, multiples,
                             T, dt, preset, amplitude, out);
    } catch (const ScenarioError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const InfeasibleParams& e) {
        std::fprintf(stderr, "infeasible: %s\n", e.what());
        return 2;
    } catch (const DivergenceError& e) {
        std::fprintf(stderr, "divergence: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
