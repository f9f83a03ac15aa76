#pragma once

#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "svinvopt/sim.hpp"

namespace svinvopt {

inline constexpr unsigned long long kDefaultSeed = 0x5A17;

/// Deterministic uniform draws with a fixed engine-to-double mapping, so runs
/// reproduce bit-exactly across compilers and standard libraries.
class Rng {
  public:
    explicit Rng(unsigned long long seed = kDefaultSeed) : engine_(seed) {}

    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(uniform01() * (hi - lo + 1.0));
    }

  private:
    std::mt19937_64 engine_;
};

struct VerificationReport {
    std::string check_name;
    double residual = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    std::map<std::string, std::string> context;
};

VerificationReport make_report(std::string name, double residual, double tolerance,
                               std::map<std::string, std::string> context = {});

/// Fitted exponential envelope: log y(t) <= log(envelope_constant * y(0)) - fitted_rate * t
/// at every sample in the window. reached_zero marks a series that hit exact
/// zero (rate reported as +infinity, counted as a pass).
struct DecayReport {
    std::string series_name;
    double fitted_rate = 0.0;
    double envelope_constant = 0.0;
    double t_start = 0.0;
    double t_end = 0.0;
    bool reached_zero = false;
    bool passed = false;
};

enum class SeriesKind { V_weak, strong_norm, mode_energy };

/// Max relative defect of V(t) + int q + int f^2/(2 gamma k^3) - V(0) over the run.
VerificationReport check_value_identity(const Trajectory& traj, const ControllerParams& ctrl,
                                        const PhysicalParams& phys, double tolerance = 1e-8);

/// Max relative defect of the open-loop energy balance at parameter r.
VerificationReport check_energy_identity(const Trajectory& traj, double r,
                                         const PhysicalParams& phys, double tolerance = 1e-9);

/// Least upper affine envelope of the log-series over [T/4, T].
DecayReport check_decay(std::span<const double> times, std::span<const double> values,
                        SeriesKind kind, std::string series_name);

struct InverseOptimalityOptions {
    double horizon = 20.0;
    double dt = 1e-2;
    Method method = Method::expm;
    double tail_tol = 1e-10;
    double tolerance = 1e-6;
    int max_horizon_doublings = 6;
};

/// (i) J(f*) equals V(0) up to the horizon tail; (ii) for each compactly
/// supported perturbation delta, the excess cost J(P + delta) - J(f*) equals
/// the exact integral of delta^2/(2 gamma k^3).
VerificationReport check_inverse_optimality(const PhysicalParams& phys,
                                            const ControllerParams& ctrl,
                                            const SystemState& init,
                                            const std::vector<InputSignal>& perturbations,
                                            const InverseOptimalityOptions& opt = {});

/// Sample-wise check of the mode-energy envelope with C = (mu+kappa)^2/sigma + 3/2.
VerificationReport check_mode_energy_envelope(const Trajectory& traj,
                                              const PhysicalParams& phys, int n,
                                              double tolerance = 1e-9);

struct GainMarginOptions {
    double horizon = 12.0;
    double dt = 1e-3;
    Method method = Method::expm;
};

/// Stability sweep over gamma values: spectral abscissa plus fitted V decay.
/// Rows with gamma <= gamma*/2 are informational (outside the guaranteed range).
std::vector<VerificationReport> check_gain_margins(const PhysicalParams& phys, double r,
                                                   double k, double Q,
                                                   const SystemState& init,
                                                   std::span<const double> gammas,
                                                   const GainMarginOptions& opt = {});

/// Random piecewise-constant signals supported on [0, support_end].
std::vector<InputSignal> random_perturbations(Rng& rng, int count, double support_end,
                                              int max_segments, double amplitude);

/// Series of the stability norms along a trajectory.
std::vector<double> weak_norm_series(const Trajectory& traj);    // xi^2+w^2+||u||^2+||phi||_H1^2
std::vector<double> strong_norm_series(const Trajectory& traj);  // ||phi_t||^2+||phi||_H2^2
std::vector<double> mode_energy_series(const Trajectory& traj, const PhysicalParams& phys,
                                       int n);

}  // namespace svinvopt
