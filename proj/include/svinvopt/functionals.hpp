#pragma once

#include <Eigen/Core>

#include "svinvopt/model.hpp"

namespace svinvopt {

/// Energy-type functional W of the field pair (phi, u), evaluated by Parseval.
double W_value(const ModalState& state, double r, const PhysicalParams& phys);

/// Control Lyapunov functional V = xi^2/2 + (w+k xi)^2/(2k^2) + Q W.
double V_value(const SystemState& state, const ControllerParams& ctrl,
               const PhysicalParams& phys);

/// Instantaneous cost q evaluated exactly in modal coordinates.
double q_value(const SystemState& state, const ControllerParams& ctrl,
               const PhysicalParams& phys);

/// LgV feedback P = gamma k (w + k xi) - gamma k^3 r Q * coupling_moment.
double feedback_P(const SystemState& state, const ControllerParams& ctrl,
                  const PhysicalParams& phys);

/// The boundary-coupling moment the input multiplies:
/// integral of (kappa x phi - ((r+1)/r) u + mu phi') over [0,1], in modal form
/// sum beta_n [(kappa + mu n^2 pi^2) a_n + ((r+1)/r) adot_n] / (n^2 pi^2).
double coupling_moment(const ModalState& state, double r, const PhysicalParams& phys);

/// Energy of mode n: P_n with b_n = a_n, c_n = adot_n/(n pi).
double mode_energy(int n, const ModalState& state, const PhysicalParams& phys);

/// Dense symmetric forms on the packed state (xi, w, a.., adot..):
/// q(x) = x' Qq x, V(x) = x' Qv x, P(x) = <p, x>, coupling moment = <l, x>.
Eigen::MatrixXd q_matrix(const PhysicalParams& phys, const ControllerParams& ctrl, int m);
Eigen::MatrixXd V_matrix(const PhysicalParams& phys, const ControllerParams& ctrl, int m);
Eigen::VectorXd P_vector(const PhysicalParams& phys, const ControllerParams& ctrl, int m);
Eigen::VectorXd L_vector(const PhysicalParams& phys, double r, int m);

/// Diagonal of xi^2 + w^2 + ||u||_{H^1}^2 + ||phi||_{H^2}^2 (the coercivity norm).
Eigen::VectorXd coercivity_norm_diagonal(int m);
/// Diagonal of xi^2 + w^2 + ||u||_2^2 + ||phi||_{H^1}^2 (the weak norm).
Eigen::VectorXd weak_norm_diagonal(int m);

/// Symmetric eigensolver by cyclic Jacobi rotations; ascending eigenvalues,
/// matching eigenvectors in columns. tol is relative to the Frobenius norm.
struct SymEigResult {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};
SymEigResult jacobi_eigensolver(Eigen::MatrixXd A, double tol = 1e-12);

/// Minimum generalized eigenvalue of (Qq, N) with N the coercivity norm,
/// plus a minimizing state of unit N-norm. The truncated realization of the
/// coercivity constant A.
struct CoercivityResult {
    double A_min = 0.0;
    Eigen::VectorXd witness;
};
CoercivityResult coercivity_margin(const PhysicalParams& phys, const ControllerParams& ctrl,
                                   int m);

/// Minimum generalized eigenvalue of (Qq + p p'/(2 gamma k^3), N); equals the
/// coercivity margin with gamma replaced by 2 gamma.
double augmented_coercivity_margin(const PhysicalParams& phys, const ControllerParams& ctrl, int m);

/// Smallest c5 with V <= c5 * (weak norm): max generalized eigenvalue of (Qv, N_weak).
double weak_norm_bound(const PhysicalParams& phys, const ControllerParams& ctrl, int m);

}  // namespace svinvopt
