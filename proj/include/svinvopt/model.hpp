#pragma once

#include <Eigen/Core>
#include <stdexcept>

#include "svinvopt/params.hpp"
#include "svinvopt/spectral.hpp"

namespace svinvopt {

/// Full truncated state: tank pair plus m modal pairs.
struct SystemState {
    TankState tank;
    ModalState modal;

    SystemState() = default;
    SystemState(TankState t, ModalState m) : tank(t), modal(std::move(m)) {}
    explicit SystemState(int m) : modal(m) {}

    int order() const { return modal.order(); }
};

/// Packed layout used by every dense form: (xi, w, a_1..a_m, adot_1..adot_m).
Eigen::VectorXd pack_state(const SystemState& s);
SystemState unpack_state(const Eigen::VectorXd& x);

struct InfeasibleParams : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Slack of assumption (A): RHS of the feasibility inequality minus k^3 Q.
/// Positive iff (r,k,Q) are admissible for the given fluid constants.
double assumption_A_margin(const PhysicalParams& phys, double r, double k, double Q);

/// Critical gain gamma*; > 2 whenever defined. Throws InfeasibleParams when
/// assumption (A) fails (denominator <= 0).
double gamma_star(const PhysicalParams& phys, double r, double k, double Q);

/// Damping mu n^2 pi^2 + kappa of mode n.
double mode_damping(const PhysicalParams& phys, int n);
/// Stiffness (sigma n^2 pi^2 + 1) n^2 pi^2 of mode n.
double mode_stiffness(const PhysicalParams& phys, int n);

/// Generator of the uncontrolled dynamics (f = 0) on the packed state.
Eigen::MatrixXd open_loop_matrix(const PhysicalParams& phys, int m);

/// Input direction: d(state)/df = -e_w + sum beta_n e_{adot_n}.
Eigen::VectorXd input_vector(int m);

/// Coefficient row of the modal feedback, f = <row, x>.
Eigen::VectorXd feedback_row(const PhysicalParams& phys, const ControllerParams& ctrl, int m);

/// Generator M of the closed loop xdot = M x with f = feedback_scale * <row, x>.
/// feedback_scale != 1 is a debug hook (negative control tests).
Eigen::MatrixXd closed_loop_matrix(const PhysicalParams& phys, const ControllerParams& ctrl,
                                   int m, double feedback_scale = 1.0);

struct ModePair {
    double a = 0.0;
    double adot = 0.0;
};

/// Exact variation-of-constants propagator of one mode over a fixed step:
/// addot = -(mu n^2 pi^2 + kappa) adot - (sigma n^2 pi^2 + 1) n^2 pi^2 a + beta_n f.
class ModePropagator {
  public:
    ModePropagator(int n, const PhysicalParams& phys, double dt);

    ModePair step(ModePair in, double f_const) const;

    /// Entries of exp(A dt) for the homogeneous part.
    double e00() const { return e00_; }
    double e01() const { return e01_; }
    double e10() const { return e10_; }
    double e11() const { return e11_; }

  private:
    double e00_, e01_, e10_, e11_;
    double shift_;  // equilibrium position per unit f: beta_n / omega0^2
};

/// One exact step of mode n under constant forcing.
ModePair mode_step_exact(int n, const PhysicalParams& phys, double f_const, double dt,
                         ModePair in);

/// Largest real part over the eigenvalues of M (QR iteration).
double spectral_abscissa(const Eigen::MatrixXd& M);

}  // namespace svinvopt
