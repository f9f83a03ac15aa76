#pragma once

#include <Eigen/Core>
#include <functional>
#include <span>
#include <vector>

#include "svinvopt/params.hpp"

namespace svinvopt {

/// Truncated modal coefficients: a_n of phi on the cosine basis phi_n,
/// adot_n of phi_t on the same basis. The constant mode is excluded, so
/// every reconstructed field has zero mean by construction.
struct ModalState {
    Eigen::VectorXd a;
    Eigen::VectorXd adot;

    ModalState() = default;
    explicit ModalState(int m)
        : a(Eigen::VectorXd::Zero(m)), adot(Eigen::VectorXd::Zero(m)) {}
    ModalState(Eigen::VectorXd a_in, Eigen::VectorXd adot_in);

    int order() const { return static_cast<int>(a.size()); }
    void validate() const;
};

/// Squared L2 norms of the reconstructed fields, evaluated by Parseval.
/// composite_L2 is ||u - mu*phi_x + kappa*(antiderivative of phi)||_2^2.
struct NormBundle {
    double phi_L2 = 0.0;
    double phi_x_L2 = 0.0;
    double phi_xx_L2 = 0.0;
    double phi_t_L2 = 0.0;
    double u_L2 = 0.0;
    double u_x_L2 = 0.0;
    double composite_L2 = 0.0;
};

/// Pointwise samples of a reconstructed field on a grid in [0,1].
struct FieldProfile {
    std::vector<double> grid;
    std::vector<double> values;
};

using ScalarFn = std::function<double(double)>;

/// phi_n(x) = sqrt(2) cos(n pi x)
double basis_phi(int n, double x);
/// g_n(x) = sqrt(2) sin(n pi x)
double basis_g(int n, double x);
/// beta_n = sqrt(2)((-1)^n - 1): -2 sqrt(2) for odd n, 0 for even n.
double beta(int n);

/// Modal coefficients of (phi0, phibar0) by the fixed projection quadrature.
ModalState project_initial(const ScalarFn& phi0, const ScalarFn& phibar0, int m);

/// phi(x) = sum a_n phi_n(x)
FieldProfile reconstruct_phi(const ModalState& state, std::span<const double> grid);
/// u(x) = sum adot_n/(n pi) g_n(x); equals the antiderivative of phi_t.
FieldProfile reconstruct_u(const ModalState& state, std::span<const double> grid);

NormBundle parseval_norms(const ModalState& state, const PhysicalParams& phys);

/// Default uniform profile grid (257 points resolves mode 32).
std::vector<double> uniform_grid(int npoints = 257);

}  // namespace svinvopt
