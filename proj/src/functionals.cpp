#include "svinvopt/functionals.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace svinvopt {

namespace {
constexpr double kPi = std::numbers::pi;
}

double W_value(const ModalState& state, double r, const PhysicalParams& phys) {
    const NormBundle nb = parseval_norms(state, phys);
    return 0.5 * nb.u_L2 + 0.5 * (1.0 + r) * nb.phi_L2 +
           0.5 * phys.sigma * (1.0 + r) * nb.phi_x_L2 + 0.5 * r * nb.composite_L2;
}

double V_value(const SystemState& state, const ControllerParams& ctrl,
               const PhysicalParams& phys) {
    const double wk = state.tank.w + ctrl.k * state.tank.xi;
    return 0.5 * state.tank.xi * state.tank.xi + wk * wk / (2.0 * ctrl.k * ctrl.k) +
           ctrl.Q * W_value(state.modal, ctrl.r, phys);
}

double coupling_moment(const ModalState& state, double r, const PhysicalParams& phys) {
    double L = 0.0;
    for (int n = 1; n <= state.order(); ++n) {
        const double n2p2 = n * n * kPi * kPi;
        L += beta(n) *
             ((phys.kappa + phys.mu * n2p2) * state.a[n - 1] +
              (r + 1.0) / r * state.adot[n - 1]) /
             n2p2;
    }
    return L;
}

double q_value(const SystemState& state, const ControllerParams& ctrl,
               const PhysicalParams& phys) {
    const double wk = state.tank.w + ctrl.k * state.tank.xi;
    double out = ctrl.k * state.tank.xi * state.tank.xi +
                 (ctrl.gamma - 2.0) / (2.0 * ctrl.k) * wk * wk;
    const NormBundle nb = parseval_norms(state.modal, phys);
    out += ctrl.Q * (phys.kappa * nb.u_L2 + phys.mu * nb.u_x_L2 +
                     phys.kappa * ctrl.r * nb.phi_L2 +
                     ctrl.r * (phys.sigma * phys.kappa + phys.mu) * nb.phi_x_L2 +
                     phys.mu * phys.sigma * ctrl.r * nb.phi_xx_L2);
    const double k3 = ctrl.k * ctrl.k * ctrl.k;
    const double L = coupling_moment(state.modal, ctrl.r, phys);
    out += 0.5 * ctrl.gamma * k3 * ctrl.r * ctrl.r * ctrl.Q * ctrl.Q * L * L -
           ctrl.gamma * ctrl.k * ctrl.Q * ctrl.r * wk * L;
    return out;
}

double feedback_P(const SystemState& state, const ControllerParams& ctrl,
                  const PhysicalParams& phys) {
    const double wk = state.tank.w + ctrl.k * state.tank.xi;
    const double k3 = ctrl.k * ctrl.k * ctrl.k;
    return ctrl.gamma * ctrl.k * wk -
           ctrl.gamma * k3 * ctrl.r * ctrl.Q *
               coupling_moment(state.modal, ctrl.r, phys);
}

double mode_energy(int n, const ModalState& state, const PhysicalParams& phys) {
    if (n < 1 || n > state.order())
        throw std::invalid_argument("mode_energy: n out of range");
    const double np = n * kPi;
    const double b = state.a[n - 1];
    const double c = state.adot[n - 1] / np;
    const double n2p2 = np * np;
    const double d = phys.mu * n2p2 + phys.kappa;
    const double comp = c + d / np * b;
    return 0.5 * n2p2 * c * c + n2p2 * (1.0 + phys.sigma * n2p2) * b * b +
           0.5 * n2p2 * comp * comp;
}

Eigen::VectorXd L_vector(const PhysicalParams& phys, double r, int m) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(2 + 2 * m);
    for (int n = 1; n <= m; ++n) {
        const double n2p2 = n * n * kPi * kPi;
        g[1 + n] = beta(n) * (phys.kappa + phys.mu * n2p2) / n2p2;
        g[1 + m + n] = beta(n) * (r + 1.0) / (r * n2p2);
    }
    return g;
}

Eigen::VectorXd P_vector(const PhysicalParams& phys, const ControllerParams& ctrl, int m) {
    const double k3 = ctrl.k * ctrl.k * ctrl.k;
    Eigen::VectorXd e = Eigen::VectorXd::Zero(2 + 2 * m);
    e[0] = ctrl.k;
    e[1] = 1.0;
    return ctrl.gamma * ctrl.k * e -
           ctrl.gamma * k3 * ctrl.r * ctrl.Q * L_vector(phys, ctrl.r, m);
}

Eigen::MatrixXd V_matrix(const PhysicalParams& phys, const ControllerParams& ctrl, int m) {
    const int dim = 2 + 2 * m;
    Eigen::MatrixXd Qv = Eigen::MatrixXd::Zero(dim, dim);
    Qv(0, 0) = 0.5 + 0.5;  // xi^2/2 plus the k^2 xi^2 part of (w+k xi)^2/(2k^2)
    Qv(0, 1) = Qv(1, 0) = 1.0 / (2.0 * ctrl.k);
    Qv(1, 1) = 1.0 / (2.0 * ctrl.k * ctrl.k);
    for (int n = 1; n <= m; ++n) {
        const double n2p2 = n * n * kPi * kPi;
        const double d = phys.mu * n2p2 + phys.kappa;
        const int ia = 1 + n, id = 1 + m + n;
        Qv(ia, ia) += ctrl.Q * (0.5 * (1.0 + ctrl.r) +
                                0.5 * phys.sigma * (1.0 + ctrl.r) * n2p2 +
                                0.5 * ctrl.r * d * d / n2p2);
        Qv(id, id) += ctrl.Q * 0.5 * (1.0 + ctrl.r) / n2p2;
        const double cross = ctrl.Q * 0.5 * ctrl.r * d / n2p2;
        Qv(ia, id) += cross;
        Qv(id, ia) += cross;
    }
    return Qv;
}

Eigen::MatrixXd q_matrix(const PhysicalParams& phys, const ControllerParams& ctrl, int m) {
    const int dim = 2 + 2 * m;
    Eigen::MatrixXd Qq = Eigen::MatrixXd::Zero(dim, dim);
    const double c2 = (ctrl.gamma - 2.0) / (2.0 * ctrl.k);
    Qq(0, 0) = ctrl.k + c2 * ctrl.k * ctrl.k;
    Qq(0, 1) = Qq(1, 0) = c2 * ctrl.k;
    Qq(1, 1) = c2;
    for (int n = 1; n <= m; ++n) {
        const double n2p2 = n * n * kPi * kPi;
        const int ia = 1 + n, id = 1 + m + n;
        Qq(ia, ia) += ctrl.Q * (phys.kappa * ctrl.r +
                                ctrl.r * (phys.sigma * phys.kappa + phys.mu) * n2p2 +
                                phys.mu * phys.sigma * ctrl.r * n2p2 * n2p2);
        Qq(id, id) += ctrl.Q * (phys.kappa / n2p2 + phys.mu);
    }
    const double k3 = ctrl.k * ctrl.k * ctrl.k;
    const Eigen::VectorXd g = L_vector(phys, ctrl.r, m);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
    e[0] = ctrl.k;
    e[1] = 1.0;
    Qq += 0.5 * ctrl.gamma * k3 * ctrl.r * ctrl.r * ctrl.Q * ctrl.Q * g * g.transpose();
    Qq -= 0.5 * ctrl.gamma * ctrl.k * ctrl.Q * ctrl.r *
          (e * g.transpose() + g * e.transpose());
    return Qq;
}

Eigen::VectorXd coercivity_norm_diagonal(int m) {
    Eigen::VectorXd d = Eigen::VectorXd::Ones(2 + 2 * m);
    for (int n = 1; n <= m; ++n) {
        const double n2p2 = n * n * kPi * kPi;
        d[1 + n] = 1.0 + n2p2 + n2p2 * n2p2;  // ||phi||_{H^2}^2 weight
        d[1 + m + n] = 1.0 / n2p2 + 1.0;      // ||u||_{H^1}^2 weight
    }
    return d;
}

Eigen::VectorXd weak_norm_diagonal(int m) {
    Eigen::VectorXd d = Eigen::VectorXd::Ones(2 + 2 * m);
    for (int n = 1; n <= m; ++n) {
        const double n2p2 = n * n * kPi * kPi;
        d[1 + n] = 1.0 + n2p2;   // ||phi||_{H^1}^2 weight
        d[1 + m + n] = 1.0 / n2p2;  // ||u||_2^2 weight
    }
    return d;
}

SymEigResult jacobi_eigensolver(Eigen::MatrixXd A, double tol) {
    const int n = static_cast<int>(A.rows());
    if (A.cols() != n) throw std::invalid_argument("jacobi_eigensolver: square matrix required");
    Eigen::MatrixXd V = Eigen::MatrixXd::Identity(n, n);
    const double scale = std::max(A.norm(), 1e-300);
    auto off_norm = [&]() {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) s += 2.0 * A(i, j) * A(i, j);
        return std::sqrt(s);
    };
    for (int sweep = 0; sweep < 100 && off_norm() > tol * scale; ++sweep) {
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = A(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int i = 0; i < n; ++i) {
                    const double aip = A(i, p), aiq = A(i, q);
                    A(i, p) = c * aip - s * aiq;
                    A(i, q) = s * aip + c * aiq;
                }
                for (int i = 0; i < n; ++i) {
                    const double api = A(p, i), aqi = A(q, i);
                    A(p, i) = c * api - s * aqi;
                    A(q, i) = s * api + c * aqi;
                }
                for (int i = 0; i < n; ++i) {
                    const double vip = V(i, p), viq = V(i, q);
                    V(i, p) = c * vip - s * viq;
                    V(i, q) = s * vip + c * viq;
                }
            }
        }
    }
    SymEigResult out;
    out.values = A.diagonal();
    out.vectors = V;
    // ascending order
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](int a, int b) { return out.values[a] < out.values[b]; });
    Eigen::VectorXd vals(n);
    Eigen::MatrixXd vecs(n, n);
    for (int i = 0; i < n; ++i) {
        vals[i] = out.values[idx[i]];
        vecs.col(i) = out.vectors.col(idx[i]);
    }
    out.values = vals;
    out.vectors = vecs;
    return out;
}

namespace {

// Extreme generalized eigenpair of (S, diag(d)) by the N^{-1/2} reduction.
std::pair<double, Eigen::VectorXd> generalized_extreme(const Eigen::MatrixXd& S,
                                                       const Eigen::VectorXd& d,
                                                       bool min_side) {
    const int n = static_cast<int>(d.size());
    if ((d.array() <= 0.0).any())
        throw std::runtime_error("generalized eigenproblem: norm diagonal not positive");
    const Eigen::VectorXd dinv_sqrt = d.array().rsqrt();
    const Eigen::MatrixXd B = dinv_sqrt.asDiagonal() * S * dinv_sqrt.asDiagonal();
    const SymEigResult eig = jacobi_eigensolver(B);
    const int pick = min_side ? 0 : n - 1;
    Eigen::VectorXd witness = dinv_sqrt.asDiagonal() * eig.vectors.col(pick);
    return {eig.values[pick], witness};
}

}  // namespace

CoercivityResult coercivity_margin(const PhysicalParams& phys, const ControllerParams& ctrl,
                                   int m) {
    if (m < 0) throw std::invalid_argument("coercivity_margin: m must be >= 0");
    auto [val, wit] = generalized_extreme(q_matrix(phys, ctrl, m),
                                          coercivity_norm_diagonal(m), true);
    return {val, std::move(wit)};
}

double augmented_coercivity_margin(const PhysicalParams& phys, const ControllerParams& ctrl, int m) {
    if (m < 0) throw std::invalid_argument("augmented_coercivity_margin: m must be >= 0");
    const double k3 = ctrl.k * ctrl.k * ctrl.k;
    const Eigen::VectorXd p = P_vector(phys, ctrl, m);
    Eigen::MatrixXd S = q_matrix(phys, ctrl, m);
    S += p * p.transpose() / (2.0 * ctrl.gamma * k3);
    return generalized_extreme(S, coercivity_norm_diagonal(m), true).first;
}

double weak_norm_bound(const PhysicalParams& phys, const ControllerParams& ctrl, int m) {
    return generalized_extreme(V_matrix(phys, ctrl, m), weak_norm_diagonal(m), false).first;
}

}  // namespace svinvopt
