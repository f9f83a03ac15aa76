#include "svinvopt/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "svinvopt/quadrature.hpp"

namespace svinvopt {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;

void check_mode_index(int n) {
    if (n < 1) throw std::domain_error("basis: mode index n must be >= 1");
}

void check_unit_interval(double x) {
    if (!(x >= 0.0 && x <= 1.0))
        throw std::domain_error("basis: x must lie in [0,1]");
}
}  // namespace

ModalState::ModalState(Eigen::VectorXd a_in, Eigen::VectorXd adot_in)
    : a(std::move(a_in)), adot(std::move(adot_in)) {
    validate();
}

void ModalState::validate() const {
    if (a.size() != adot.size())
        throw std::invalid_argument("ModalState: a and adot lengths differ");
    if (!a.allFinite() || !adot.allFinite())
        throw std::invalid_argument("ModalState: non-finite coefficient");
}

double basis_phi(int n, double x) {
    check_mode_index(n);
    check_unit_interval(x);
    return kSqrt2 * std::cos(n * kPi * x);
}

double basis_g(int n, double x) {
    check_mode_index(n);
    check_unit_interval(x);
    return kSqrt2 * std::sin(n * kPi * x);
}

double beta(int n) {
    check_mode_index(n);
    return (n % 2 == 0) ? 0.0 : -2.0 * kSqrt2;
}

ModalState project_initial(const ScalarFn& phi0, const ScalarFn& phibar0, int m) {
    if (m < 1) throw std::invalid_argument("project_initial: m must be >= 1");
    const QuadratureRule& rule = projection_rule();
    ModalState state(m);
    for (int n = 1; n <= m; ++n) {
        state.a[n - 1] =
            rule.integrate([&](double x) { return phi0(x) * basis_phi(n, x); });
        state.adot[n - 1] =
            rule.integrate([&](double x) { return phibar0(x) * basis_phi(n, x); });
    }
    if (!state.a.allFinite() || !state.adot.allFinite())
        throw std::runtime_error("project_initial: non-finite quadrature result");
    return state;
}

FieldProfile reconstruct_phi(const ModalState& state, std::span<const double> grid) {
    FieldProfile out;
    out.grid.assign(grid.begin(), grid.end());
    out.values.resize(grid.size());
    for (size_t i = 0; i < grid.size(); ++i) {
        double v = 0.0;
        for (int n = 1; n <= state.order(); ++n) v += state.a[n - 1] * basis_phi(n, grid[i]);
        out.values[i] = v;
    }
    return out;
}

FieldProfile reconstruct_u(const ModalState& state, std::span<const double> grid) {
    FieldProfile out;
    out.grid.assign(grid.begin(), grid.end());
    out.values.resize(grid.size());
    for (size_t i = 0; i < grid.size(); ++i) {
        double v = 0.0;
        for (int n = 1; n <= state.order(); ++n)
            v += state.adot[n - 1] / (n * kPi) * basis_g(n, grid[i]);
        out.values[i] = v;
    }
    return out;
}

NormBundle parseval_norms(const ModalState& state, const PhysicalParams& phys) {
    NormBundle nb;
    for (int n = 1; n <= state.order(); ++n) {
        const double an = state.a[n - 1];
        const double adn = state.adot[n - 1];
        const double n2p2 = n * n * kPi * kPi;
        const double dn = phys.mu * n2p2 + phys.kappa;
        nb.phi_L2 += an * an;
        nb.phi_x_L2 += n2p2 * an * an;
        nb.phi_xx_L2 += n2p2 * n2p2 * an * an;
        nb.phi_t_L2 += adn * adn;
        nb.u_L2 += adn * adn / n2p2;
        nb.u_x_L2 += adn * adn;
        const double comp = adn + dn * an;
        nb.composite_L2 += comp * comp / n2p2;
    }
    return nb;
}

std::vector<double> uniform_grid(int npoints) {
    if (npoints < 2) throw std::invalid_argument("uniform_grid: need >= 2 points");
    std::vector<double> g(npoints);
    for (int i = 0; i < npoints; ++i) g[i] = static_cast<double>(i) / (npoints - 1);
    return g;
}

}  // namespace svinvopt
