#include "svinvopt/scenario.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <sstream>

namespace svinvopt {

namespace {

constexpr double kPi = std::numbers::pi;

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

double parse_double(const std::string& v, int line) {
    try {
        size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ScenarioError("scenario line " + std::to_string(line) +
                            ": expected a number, got '" + v + "'");
    }
}

std::vector<double> parse_double_list(const std::string& v, int line) {
    std::vector<double> out;
    for (const std::string& tok : split_list(v)) out.push_back(parse_double(tok, line));
    return out;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

const std::vector<std::string>& valid_check_names() {
    static const std::vector<std::string> names = {
        "value_identity",        "energy_identity", "decay",
        "inverse_optimality",    "mode_energy_envelope", "gain_margins"};
    return names;
}

Scenario parse_scenario_text(const std::string& text) {
    Scenario sc;
    bool gamma_set = false, multiple_set = false;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        const auto hash = s.find('#');
        if (hash != std::string::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw ScenarioError("scenario line " + std::to_string(line) +
                                    ": malformed section header '" + raw + "'");
            section = trim(s.substr(1, s.size() - 2));
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ScenarioError("scenario line " + std::to_string(line) +
                                ": expected key = value, got '" + raw + "'");
        const std::string key = trim(s.substr(0, eq));
        const std::string val = trim(s.substr(eq + 1));
        auto bad_key = [&]() {
            throw ScenarioError("scenario line " + std::to_string(line) +
                                ": unknown key '" + key + "' in section [" + section + "]");
        };
        if (section == "physical") {
            if (key == "sigma") sc.phys.sigma = parse_double(val, line);
            else if (key == "mu") sc.phys.mu = parse_double(val, line);
            else if (key == "kappa") sc.phys.kappa = parse_double(val, line);
            else bad_key();
        } else if (section == "controller") {
            if (key == "gamma") { sc.ctrl.gamma = parse_double(val, line); gamma_set = true; }
            else if (key == "gamma_star_multiple") {
                sc.gamma_star_multiple = parse_double(val, line);
                multiple_set = true;
            } else if (key == "r") sc.ctrl.r = parse_double(val, line);
            else if (key == "k") sc.ctrl.k = parse_double(val, line);
            else if (key == "Q") sc.ctrl.Q = parse_double(val, line);
            else bad_key();
        } else if (section == "numerics") {
            if (key == "m") sc.m = static_cast<int>(parse_double(val, line));
            else if (key == "T") sc.T = parse_double(val, line);
            else if (key == "dt") sc.dt = parse_double(val, line);
            else if (key == "dt_out") sc.dt_out = parse_double(val, line);
            else if (key == "seed") sc.seed = static_cast<unsigned long long>(parse_double(val, line));
            else if (key == "method") {
                if (val == "rk4") sc.method = Method::rk4;
                else if (val == "expm") sc.method = Method::expm;
                else
                    throw ScenarioError("scenario line " + std::to_string(line) +
                                        ": method must be rk4 or expm");
            } else bad_key();
        } else if (section == "init") {
            if (key == "preset") sc.init.preset = val;
            else if (key == "amplitude") sc.init.amplitude = parse_double(val, line);
            else if (key == "xi") sc.init.xi = parse_double(val, line);
            else if (key == "w") sc.init.w = parse_double(val, line);
            else if (key == "a") sc.init.a = parse_double_list(val, line);
            else if (key == "adot") sc.init.adot = parse_double_list(val, line);
            else bad_key();
        } else if (section == "input") {
            if (!sc.input) sc.input.emplace();
            if (key == "breakpoints") sc.input->breakpoints = parse_double_list(val, line);
            else if (key == "values") sc.input->values = parse_double_list(val, line);
            else bad_key();
        } else if (section == "checks") {
            if (key == "run") sc.checks = split_list(val);
            else if (key == "inverse_optimality_draws")
                sc.inverse_optimality_draws = static_cast<int>(parse_double(val, line));
            else bad_key();
        } else if (section == "output") {
            if (key == "csv") sc.csv_path = val;
            else if (key == "json") sc.json_path = val;
            else bad_key();
        } else {
            throw ScenarioError("scenario line " + std::to_string(line) +
                                ": unknown section [" + section + "]");
        }
    }
    if (gamma_set && multiple_set)
        throw ScenarioError("scenario: set either gamma or gamma_star_multiple, not both");
    if (multiple_set) {
        sc.gamma_from_multiple = true;
        sc.ctrl.gamma =
            sc.gamma_star_multiple * gamma_star(sc.phys, sc.ctrl.r, sc.ctrl.k, sc.ctrl.Q);
    }
    if (sc.m < 1) throw ScenarioError("scenario: m must be >= 1");
    if (!(sc.T > 0.0) || !(sc.dt > 0.0))
        throw ScenarioError("scenario: T and dt must be > 0");
    sc.phys.validate();
    sc.ctrl.validate();
    if (sc.input) sc.input->validate();
    for (const std::string& name : sc.checks) {
        const auto& valid = valid_check_names();
        if (std::find(valid.begin(), valid.end(), name) == valid.end()) {
            std::string list;
            for (const auto& v : valid) list += (list.empty() ? "" : ", ") + v;
            throw ScenarioError("scenario: unknown check '" + name +
                                "'; valid names: " + list);
        }
    }
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str());
}

SystemState initial_state(const Scenario& sc) {
    SystemState s(sc.m);
    const InitSpec& init = sc.init;
    const double amp = init.amplitude;
    if (init.preset == "zero") {
        // all zero
    } else if (init.preset == "mode1" || init.preset == "mode3") {
        const int n = (init.preset == "mode1") ? 1 : 3;
        if (n > sc.m)
            throw ScenarioError("init preset " + init.preset + " needs m >= " +
                                std::to_string(n));
        s.modal.a[n - 1] = amp;
        s.tank.xi = amp;
    } else if (init.preset == "ramp") {
        // phi0 = amp (x - 1/2): a_n = amp beta_n / (n^2 pi^2)
        for (int n = 1; n <= sc.m; ++n)
            s.modal.a[n - 1] = amp * beta(n) / (n * n * kPi * kPi);
        s.tank.xi = amp;
    } else if (init.preset == "mixed") {
        // first four odd modes, geometric amplitudes
        int j = 0;
        for (int n = 1; n <= 7 && n <= sc.m; n += 2, ++j)
            s.modal.a[n - 1] = amp * std::pow(0.5, j);
        s.tank.xi = amp;
    } else if (init.preset == "coeffs") {
        if (init.a.size() > static_cast<size_t>(sc.m) ||
            init.adot.size() > static_cast<size_t>(sc.m))
            throw ScenarioError("init coeffs longer than m");
        for (size_t i = 0; i < init.a.size(); ++i) s.modal.a[i] = init.a[i];
        for (size_t i = 0; i < init.adot.size(); ++i) s.modal.adot[i] = init.adot[i];
    } else {
        throw ScenarioError("unknown init preset '" + init.preset +
                            "'; valid: zero, mode1, mode3, ramp, mixed, coeffs");
    }
    if (init.xi) s.tank.xi = *init.xi;
    if (init.w) s.tank.w = *init.w;
    return s;
}

void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write: " + tmp);
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const Scenario& sc) {
    std::string out;
    out.reserve(traj.size() * 64);
    out += "# schema=1\n";
    out += "t,xi,w,f,V,W,q,cost_q_int,cost_f_int,phi_L2,phi_x_L2,phi_xx_L2,phi_t_L2";
    for (int n = 1; n <= sc.m; ++n) out += ",a_" + std::to_string(n);
    for (int n = 1; n <= sc.m; ++n) out += ",adot_" + std::to_string(n);
    out += "\n";
    for (size_t i = 0; i < traj.size(); ++i) {
        const SystemState& s = traj.states[i];
        const NormBundle nb = parseval_norms(s.modal, sc.phys);
        out += fmt17(traj.times[i]);
        out += ',' + fmt17(s.tank.xi);
        out += ',' + fmt17(s.tank.w);
        out += ',' + fmt17(traj.f_values[i]);
        out += ',' + fmt17(traj.V_series[i]);
        out += ',' + fmt17(W_value(s.modal, sc.ctrl.r, sc.phys));
        out += ',' + fmt17(q_value(s, sc.ctrl, sc.phys));
        out += ',' + fmt17(traj.cost_q_integral[i]);
        out += ',' + fmt17(traj.cost_f_integral[i]);
        out += ',' + fmt17(nb.phi_L2);
        out += ',' + fmt17(nb.phi_x_L2);
        out += ',' + fmt17(nb.phi_xx_L2);
        out += ',' + fmt17(nb.phi_t_L2);
        for (int n = 0; n < sc.m; ++n) out += ',' + fmt17(s.modal.a[n]);
        for (int n = 0; n < sc.m; ++n) out += ',' + fmt17(s.modal.adot[n]);
        out += '\n';
    }
    atomic_write(path, out);
}

namespace {

nlohmann::json scenario_json(const Scenario& sc) {
    nlohmann::json j;
    j["physical"] = {{"sigma", sc.phys.sigma}, {"mu", sc.phys.mu}, {"kappa", sc.phys.kappa}};
    j["controller"] = {{"gamma", sc.ctrl.gamma},
                       {"r", sc.ctrl.r},
                       {"k", sc.ctrl.k},
                       {"Q", sc.ctrl.Q},
                       {"gamma_from_multiple", sc.gamma_from_multiple},
                       {"gamma_star_multiple", sc.gamma_star_multiple}};
    j["numerics"] = {{"m", sc.m},
                     {"T", sc.T},
                     {"dt", sc.dt},
                     {"dt_out", sc.dt_out},
                     {"method", sc.method == Method::rk4 ? "rk4" : "expm"},
                     {"seed", sc.seed}};
    j["init"] = {{"preset", sc.init.preset}, {"amplitude", sc.init.amplitude}};
    if (sc.init.xi) j["init"]["xi"] = *sc.init.xi;
    if (sc.init.w) j["init"]["w"] = *sc.init.w;
    if (!sc.init.a.empty()) j["init"]["a"] = sc.init.a;
    if (!sc.init.adot.empty()) j["init"]["adot"] = sc.init.adot;
    if (sc.input) {
        j["input"] = {{"breakpoints", sc.input->breakpoints}, {"values", sc.input->values}};
    }
    j["checks"] = sc.checks;
    return j;
}

}  // namespace

std::string scenario_json_text(const Scenario& sc) { return scenario_json(sc).dump(2) + "\n"; }

std::string summary_json_text(const Scenario& sc, const Trajectory& traj) {
    nlohmann::json j;
    j["schema"] = 1;
    j["tool_version"] = "0.1.0";
    j["scenario"] = scenario_json(sc);
    const SystemState& last = traj.states.back();
    const NormBundle nb = parseval_norms(last.modal, sc.phys);
    j["terminal"] = {{"t", traj.times.back()},
                     {"xi", last.tank.xi},
                     {"w", last.tank.w},
                     {"V", traj.V_series.back()},
                     {"W", W_value(last.modal, sc.ctrl.r, sc.phys)},
                     {"phi_L2", nb.phi_L2},
                     {"phi_t_L2", nb.phi_t_L2},
                     {"cost_q_int", traj.cost_q_integral.back()},
                     {"cost_f_int", traj.cost_f_integral.back()}};
    try {
        const CostResult cost = total_cost_J(traj);
        j["cost"] = {{"J", cost.J},
                     {"V0", cost.V0},
                     {"V_terminal", cost.V_terminal},
                     {"tail_ratio", cost.tail_ratio}};
    } catch (const HorizonTooShort& e) {
        j["cost"] = nullptr;
        j["cost_note"] = std::string("horizon too short: ") + e.what();
    }
    if (traj.size() >= 10) {
        nlohmann::json dec;
        const DecayReport v =
            check_decay(traj.times, traj.V_series, SeriesKind::V_weak, "V");
        const std::vector<double> weak = weak_norm_series(traj);
        const DecayReport wk = check_decay(traj.times, weak, SeriesKind::V_weak, "weak_norm");
        const std::vector<double> strong = strong_norm_series(traj);
        const DecayReport st =
            check_decay(traj.times, strong, SeriesKind::strong_norm, "strong_norm");
        for (const DecayReport* d : {&v, &wk, &st}) {
            dec[d->series_name] = {{"fitted_rate", d->fitted_rate},
                                   {"envelope_constant", d->envelope_constant},
                                   {"window", {d->t_start, d->t_end}},
                                   {"reached_zero", d->reached_zero}};
        }
        j["decay"] = dec;
    }
    return j.dump(2) + "\n";
}

std::string reports_json_text(const Scenario& sc,
                              const std::vector<VerificationReport>& reports) {
    nlohmann::json j;
    j["schema"] = 1;
    j["tool_version"] = "0.1.0";
    j["scenario"] = scenario_json(sc);
    j["seed"] = sc.seed;
    nlohmann::json arr = nlohmann::json::array();
    for (const VerificationReport& rep : reports) {
        nlohmann::json r = {{"check", rep.check_name},
                            {"residual", rep.residual},
                            {"tolerance", rep.tolerance},
                            {"passed", rep.passed}};
        r["context"] = rep.context;
        arr.push_back(std::move(r));
    }
    j["reports"] = std::move(arr);
    return j.dump(2) + "\n";
}

}  // namespace svinvopt
