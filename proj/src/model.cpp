#include "svinvopt/model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

namespace svinvopt {

namespace {
constexpr double kPi = std::numbers::pi;

double feasibility_bracket(const PhysicalParams& phys, double r) {
    const double p2 = kPi * kPi;
    const double t1 = 1.0 + phys.kappa / (kPi * phys.mu * std::sqrt(3.0));
    const double t2 = (r + 1.0) * (r + 1.0) * (1.0 + phys.sigma * p2) /
                      (r * phys.mu * (phys.kappa + phys.mu * p2));
    return t1 * t1 + t2;
}
}  // namespace

Eigen::VectorXd pack_state(const SystemState& s) {
    const int m = s.order();
    Eigen::VectorXd x(2 + 2 * m);
    x[0] = s.tank.xi;
    x[1] = s.tank.w;
    x.segment(2, m) = s.modal.a;
    x.segment(2 + m, m) = s.modal.adot;
    return x;
}

SystemState unpack_state(const Eigen::VectorXd& x) {
    if (x.size() < 2 || x.size() % 2 != 0)
        throw std::invalid_argument("unpack_state: dimension must be 2m+2");
    const int m = static_cast<int>(x.size() - 2) / 2;
    SystemState s(m);
    s.tank.xi = x[0];
    s.tank.w = x[1];
    s.modal.a = x.segment(2, m);
    s.modal.adot = x.segment(2 + m, m);
    return s;
}

double assumption_A_margin(const PhysicalParams& phys, double r, double k, double Q) {
    phys.validate();
    if (!(r > 0.0) || !(k > 0.0) || !(Q >= 0.0))
        throw std::invalid_argument("assumption_A_margin: need r, k > 0 and Q >= 0");
    const double rhs =
        (1.0 + phys.sigma * kPi * kPi) / (phys.mu * r * feasibility_bracket(phys, r));
    return rhs - k * k * k * Q;
}

double gamma_star(const PhysicalParams& phys, double r, double k, double Q) {
    phys.validate();
    if (!(r > 0.0) || !(k > 0.0) || !(Q >= 0.0))
        throw std::invalid_argument("gamma_star: need r, k > 0 and Q >= 0");
    const double denom = 1.0 - phys.mu * r * k * k * k * Q /
                                   (1.0 + phys.sigma * kPi * kPi) *
                                   feasibility_bracket(phys, r);
    if (!(denom > 0.0))
        throw InfeasibleParams("gamma_star: assumption (A) violated (k^3 Q too large)");
    return 2.0 / denom;
}

double mode_damping(const PhysicalParams& phys, int n) {
    return phys.mu * n * n * kPi * kPi + phys.kappa;
}

double mode_stiffness(const PhysicalParams& phys, int n) {
    const double n2p2 = n * n * kPi * kPi;
    return (phys.sigma * n2p2 + 1.0) * n2p2;
}

Eigen::MatrixXd open_loop_matrix(const PhysicalParams& phys, int m) {
    const int dim = 2 + 2 * m;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, dim);
    A(0, 1) = 1.0;
    for (int n = 1; n <= m; ++n) {
        A(1 + n, 1 + m + n) = 1.0;
        A(1 + m + n, 1 + n) = -mode_stiffness(phys, n);
        A(1 + m + n, 1 + m + n) = -mode_damping(phys, n);
    }
    return A;
}

Eigen::VectorXd input_vector(int m) {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(2 + 2 * m);
    b[1] = -1.0;
    for (int n = 1; n <= m; ++n) b[1 + m + n] = beta(n);
    return b;
}

Eigen::VectorXd feedback_row(const PhysicalParams& phys, const ControllerParams& ctrl,
                             int m) {
    const double k3 = ctrl.k * ctrl.k * ctrl.k;
    Eigen::VectorXd row = Eigen::VectorXd::Zero(2 + 2 * m);
    row[0] = ctrl.gamma * ctrl.k * ctrl.k;
    row[1] = ctrl.gamma * ctrl.k;
    for (int n = 1; n <= m; ++n) {
        const double n2p2 = n * n * kPi * kPi;
        row[1 + n] = -ctrl.gamma * k3 * ctrl.r * ctrl.Q * beta(n) *
                     (phys.kappa + phys.mu * n2p2) / n2p2;
        row[1 + m + n] = -ctrl.gamma * k3 * (ctrl.r + 1.0) * ctrl.Q * beta(n) / n2p2;
    }
    return row;
}

Eigen::MatrixXd closed_loop_matrix(const PhysicalParams& phys, const ControllerParams& ctrl,
                                   int m, double feedback_scale) {
    if (m < 0) throw std::invalid_argument("closed_loop_matrix: m must be >= 0");
    const Eigen::VectorXd row = feedback_scale * feedback_row(phys, ctrl, m);
    Eigen::MatrixXd M = open_loop_matrix(phys, m);
    M.row(1) -= row.transpose();
    for (int n = 1; n <= m; ++n) M.row(1 + m + n) += beta(n) * row.transpose();
    return M;
}

ModePropagator::ModePropagator(int n, const PhysicalParams& phys, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("ModePropagator: dt must be > 0");
    const double d = mode_damping(phys, n);
    const double w2 = mode_stiffness(phys, n);
    shift_ = beta(n) / w2;

    // exp(A h) with A = [[0,1],[-w2,-d]] via the splitting A = -(d/2)I + B,
    // B^2 = ((d/2)^2 - w2) I. q below is the dimensionless (theta h)^2, signed.
    const double q = (0.25 * d * d - w2) * dt * dt;
    double c, s;  // s carries one factor of time
    if (std::abs(q) < 1e-6) {
        c = 1.0 + q * (0.5 + q * (1.0 / 24.0 + q / 720.0));
        s = dt * (1.0 + q * (1.0 / 6.0 + q * (1.0 / 120.0 + q / 5040.0)));
    } else if (q > 0.0) {
        const double th = std::sqrt(q);
        c = std::cosh(th);
        s = dt * std::sinh(th) / th;
    } else {
        const double th = std::sqrt(-q);
        c = std::cos(th);
        s = dt * std::sin(th) / th;
    }
    const double decay = std::exp(-0.5 * d * dt);
    e00_ = decay * (c + 0.5 * d * s);
    e01_ = decay * s;
    e10_ = decay * (-w2 * s);
    e11_ = decay * (c - 0.5 * d * s);
}

ModePair ModePropagator::step(ModePair in, double f_const) const {
    const double a_eq = shift_ * f_const;
    const double za = in.a - a_eq;
    const double zd = in.adot;
    return {a_eq + e00_ * za + e01_ * zd, e10_ * za + e11_ * zd};
}

ModePair mode_step_exact(int n, const PhysicalParams& phys, double f_const, double dt,
                         ModePair in) {
    return ModePropagator(n, phys, dt).step(in, f_const);
}

double spectral_abscissa(const Eigen::MatrixXd& M) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(M, /*computeEigenvectors=*/false);
    return es.eigenvalues().real().maxCoeff();
}

}  // namespace svinvopt
