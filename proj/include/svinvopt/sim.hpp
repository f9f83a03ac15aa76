#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "svinvopt/functionals.hpp"

namespace svinvopt {

/// Piecewise-constant input: values[i] holds on [breakpoints[i], breakpoints[i+1]),
/// the final value extends to the horizon. Realizes discontinuous inputs at the
/// truncated level.
struct InputSignal {
    std::vector<double> breakpoints;  // increasing, starting at 0
    std::vector<double> values;       // same length as breakpoints

    static InputSignal constant(double value);

    double value_at(double t) const;
    /// Exact integral of the squared signal over [0, T].
    double square_integral(double T) const;
    void validate() const;
};

/// Time-stamped run: states, realized input, running cost accumulators.
struct Trajectory {
    std::vector<double> times;
    std::vector<SystemState> states;
    std::vector<double> f_values;
    std::vector<double> cost_q_integral;  // running integral of q
    std::vector<double> cost_f_integral;  // running integral of f^2/(2 gamma k^3)
    std::vector<double> V_series;

    /// Running integrals needed by the open-loop energy balance. forcing_a and
    /// forcing_adot split the input-coupling integral so any r can be formed
    /// afterwards: the balance forcing term is r*forcing_a + (r+1)*forcing_adot.
    struct EnergySeries {
        std::vector<double> int_phi_L2, int_phi_x_L2, int_phi_xx_L2;
        std::vector<double> int_u_L2, int_u_x_L2;
        std::vector<double> forcing_a, forcing_adot;
    };
    std::optional<EnergySeries> energy;

    /// Running integral of (f - P(x))^2/(2 gamma k^3) along driven closed loops.
    std::optional<std::vector<double>> excess_integral;

    size_t size() const { return times.size(); }
};

enum class Method { rk4, expm };

struct SimOptions {
    double dt = 1e-3;
    Method method = Method::rk4;
    double dt_out = 0.0;          // 0: record every integration step
    double feedback_scale = 1.0;  // debug hook; -1 flips the applied feedback sign
    double divergence_factor = 1e12;
};

struct DivergenceError : std::runtime_error {
    double time;
    explicit DivergenceError(double t);
};

/// Open loop under a piecewise-constant input. Every mode is advanced by the
/// exact variation-of-constants propagator per constant-f segment; the tank by
/// the exact double-integrator formulas. Output lands on the dt_out grid
/// unioned with the signal breakpoints. When ctrl is given, V and the cost
/// accumulators are filled as well.
Trajectory simulate_open_loop(const PhysicalParams& phys, const SystemState& init,
                              const InputSignal& f, double T, double dt_out,
                              const ControllerParams* ctrl = nullptr);

/// Closed loop xdot = M x (+ input_vector * delta) with the LgV feedback and
/// cost accumulators integrated alongside. additive_input drives
/// f(t) = P(x(t)) + delta(t) for the inverse-optimality experiments.
Trajectory simulate_closed_loop(const PhysicalParams& phys, const ControllerParams& ctrl,
                                const SystemState& init, double T,
                                const SimOptions& opt = {},
                                const InputSignal* additive_input = nullptr);

struct HorizonTooShort : std::runtime_error {
    double tail_ratio;
    HorizonTooShort(double ratio, double tol);
};

struct CostResult {
    double J = 0.0;
    double V0 = 0.0;
    double V_terminal = 0.0;
    double tail_ratio = 0.0;
};

/// Total cost J = int q + int f^2/(2 gamma k^3) over the run, valid only when
/// the horizon tail V(T) <= tail_tol * V(0) is met (throws HorizonTooShort
/// carrying the ratio otherwise).
CostResult total_cost_J(const Trajectory& traj, double tail_tol = 1e-10);

}  // namespace svinvopt
