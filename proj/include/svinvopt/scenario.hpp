#pragma once

#include <optional>
#include <string>
#include <vector>

#include "svinvopt/verify.hpp"

namespace svinvopt {

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Named initial condition. Presets fix the modal field phi0 (phibar0 = 0)
/// and the tank pair (amplitude, 0); explicit xi/w/a/adot entries override.
struct InitSpec {
    std::string preset = "zero";  // zero | mode1 | mode3 | ramp | mixed | coeffs
    double amplitude = 1.0;
    std::optional<double> xi, w;
    std::vector<double> a, adot;  // used by preset "coeffs"
};

struct Scenario {
    PhysicalParams phys;
    ControllerParams ctrl;           // gamma resolved on load
    bool gamma_from_multiple = false;
    double gamma_star_multiple = 0.0;
    int m = 16;
    double T = 20.0;
    double dt = 1e-3;
    double dt_out = 1e-2;
    Method method = Method::rk4;
    InitSpec init;
    std::optional<InputSignal> input;  // present: open-loop simulate
    std::vector<std::string> checks;   // empty: full default suite
    int inverse_optimality_draws = 20;
    std::string csv_path;
    std::string json_path;
    unsigned long long seed = kDefaultSeed;
};

/// All check names cmd_verify accepts.
const std::vector<std::string>& valid_check_names();

/// Flat key/value scenario text with one section level. Throws ScenarioError
/// with line diagnostics; InfeasibleParams when gamma_star_multiple is used
/// with parameters violating assumption (A).
Scenario parse_scenario_text(const std::string& text);
Scenario load_scenario(const std::string& path);

SystemState initial_state(const Scenario& sc);

/// CSV trajectory with the fixed `# schema=1` column set, 17 significant
/// digits, written atomically (temp then rename).
void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const Scenario& sc);

std::string scenario_json_text(const Scenario& sc);
std::string summary_json_text(const Scenario& sc, const Trajectory& traj);
std::string reports_json_text(const Scenario& sc,
                              const std::vector<VerificationReport>& reports);

void atomic_write(const std::string& path, const std::string& content);

}  // namespace svinvopt
