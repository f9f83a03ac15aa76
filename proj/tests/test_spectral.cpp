#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "svinvopt/spectral.hpp"
#include "svinvopt/verify.hpp"

using namespace svinvopt;
namespace tst = svinvopt::testing;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;

ModalState random_state(Rng& rng, int m, double amp = 1.0) {
    ModalState s(m);
    for (int i = 0; i < m; ++i) {
        s.a[i] = rng.uniform(-amp, amp);
        s.adot[i] = rng.uniform(-amp, amp);
    }
    return s;
}
}  // namespace

TEST_CASE("basis values") {
    CHECK(basis_phi(1, 0.0) == doctest::Approx(kSqrt2).epsilon(1e-15));
    CHECK(basis_phi(2, 0.5) == doctest::Approx(-kSqrt2).epsilon(1e-15));
    CHECK(basis_phi(3, 1.0 / 3.0) == doctest::Approx(-kSqrt2).epsilon(1e-14));
    CHECK(basis_g(1, 0.5) == doctest::Approx(kSqrt2).epsilon(1e-15));
    CHECK(basis_g(1, 0.0) == 0.0);
    CHECK(basis_g(2, 0.25) == doctest::Approx(kSqrt2).epsilon(1e-15));
}

TEST_CASE("basis domain errors") {
    CHECK_THROWS_AS(basis_phi(0, 0.5), std::domain_error);
    CHECK_THROWS_AS(basis_phi(1, -0.1), std::domain_error);
    CHECK_THROWS_AS(basis_phi(1, 1.1), std::domain_error);
    CHECK_THROWS_AS(basis_g(0, 0.5), std::domain_error);
    CHECK_THROWS_AS(beta(0), std::domain_error);
}

TEST_CASE("beta parity") {
    CHECK(beta(1) == doctest::Approx(-2.0 * kSqrt2).epsilon(1e-15));
    CHECK(beta(2) == 0.0);
    CHECK(beta(7) == doctest::Approx(-2.0 * kSqrt2).epsilon(1e-15));
}

TEST_CASE("orthonormality of both bases under the module quadrature") {
    const QuadratureRule& rule = projection_rule();
    double worst = 0.0;
    for (int i = 1; i <= 32; ++i) {
        for (int j = i; j <= 32; ++j) {
            const double pp =
                rule.integrate([&](double x) { return basis_phi(i, x) * basis_phi(j, x); });
            const double gg =
                rule.integrate([&](double x) { return basis_g(i, x) * basis_g(j, x); });
            const double target = (i == j) ? 1.0 : 0.0;
            worst = std::max({worst, std::abs(pp - target), std::abs(gg - target)});
        }
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("project_initial recovers a pure mode") {
    const ModalState s = project_initial(
        [](double x) { return kSqrt2 * std::cos(kPi * x); }, [](double) { return 0.0; }, 4);
    CHECK(s.a[0] == doctest::Approx(1.0).epsilon(1e-13));
    for (int i = 1; i < 4; ++i) CHECK(std::abs(s.a[i]) < 1e-13);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(s.adot[i]) < 1e-13);
}

TEST_CASE("project_initial of zero data") {
    const ModalState s =
        project_initial([](double) { return 0.0; }, [](double) { return 0.0; }, 3);
    CHECK(s.a.norm() == 0.0);
    CHECK(s.adot.norm() == 0.0);
}

TEST_CASE("project_initial of the ramp matches the analytic integral") {
    const ModalState s = project_initial([](double x) { return x - 0.5; },
                                         [](double) { return 0.0; }, 8);
    for (int n = 1; n <= 8; ++n) {
        const double exact = (n % 2 == 1) ? -2.0 * kSqrt2 / (n * n * kPi * kPi) : 0.0;
        CHECK(s.a[n - 1] == doctest::Approx(exact).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("reconstruct_phi pointwise") {
    ModalState s(2);
    s.a << 1.0, 0.0;
    const std::vector<double> grid{0.0};
    CHECK(reconstruct_phi(s, grid).values[0] == doctest::Approx(kSqrt2).epsilon(1e-15));

    ModalState z(3);
    const auto zero = reconstruct_phi(z, uniform_grid(17));
    for (double v : zero.values) CHECK(v == 0.0);

    ModalState s2(2);
    s2.a << 1.0, 1.0;
    const std::vector<double> mid{0.5};
    CHECK(reconstruct_phi(s2, mid).values[0] == doctest::Approx(-kSqrt2).epsilon(1e-14));
}

TEST_CASE("reconstruct_u pointwise and boundary zeros") {
    ModalState s(2);
    s.adot << kPi, 0.0;
    const std::vector<double> mid{0.5};
    CHECK(reconstruct_u(s, mid).values[0] == doctest::Approx(kSqrt2).epsilon(1e-14));

    Rng rng;
    const ModalState r = random_state(rng, 5);
    const std::vector<double> ends{0.0, 1.0};
    const auto prof = reconstruct_u(r, ends);
    CHECK(std::abs(prof.values[0]) < 1e-13);
    CHECK(std::abs(prof.values[1]) < 1e-13);
}

TEST_CASE("reconstruct_u equals the cumulative integral of phi_t") {
    Rng rng(0x5A17);
    ModalState s(2);
    s.adot << 1.0, 1.0;
    const auto pt = tst::phi_t_fn(s);
    for (double x : {0.25, 0.5, 0.8, 1.0}) {
        const double expected = tst::integrate_interval(pt, x);
        const std::vector<double> g{x};
        CHECK(reconstruct_u(s, g).values[0] ==
              doctest::Approx(expected).epsilon(1e-12).scale(1.0));
    }
    const ModalState r = random_state(rng, 6);
    const auto pt2 = tst::phi_t_fn(r);
    for (double x : uniform_grid(9)) {
        const double expected = (x == 0.0) ? 0.0 : tst::integrate_interval(pt2, x);
        const std::vector<double> g{x};
        CHECK(reconstruct_u(r, g).values[0] ==
              doctest::Approx(expected).epsilon(1e-11).scale(1.0));
    }
}

TEST_CASE("parseval norms of a pure mode") {
    PhysicalParams phys;
    ModalState s(3);
    s.a << 1.0, 0.0, 0.0;
    const NormBundle nb = parseval_norms(s, phys);
    CHECK(nb.phi_L2 == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(nb.phi_x_L2 == doctest::Approx(kPi * kPi).epsilon(1e-15));
    CHECK(nb.phi_xx_L2 == doctest::Approx(kPi * kPi * kPi * kPi).epsilon(1e-15));
    CHECK(nb.phi_t_L2 == 0.0);

    const NormBundle zero = parseval_norms(ModalState(4), phys);
    CHECK(zero.phi_L2 == 0.0);
    CHECK(zero.composite_L2 == 0.0);
}

TEST_CASE("parseval norms match the quadrature of the reconstructed fields") {
    Rng rng;
    PhysicalParams phys{0.8, 0.6, 0.3};
    const ModalState s = random_state(rng, 4);
    const NormBundle nb = parseval_norms(s, phys);

    CHECK(nb.phi_L2 == doctest::Approx(tst::l2sq(tst::phi_fn(s))).epsilon(1e-10));
    CHECK(nb.phi_x_L2 == doctest::Approx(tst::l2sq(tst::phi_x_fn(s))).epsilon(1e-10));
    CHECK(nb.phi_xx_L2 == doctest::Approx(tst::l2sq(tst::phi_xx_fn(s))).epsilon(1e-10));
    CHECK(nb.phi_t_L2 == doctest::Approx(tst::l2sq(tst::phi_t_fn(s))).epsilon(1e-10));
    CHECK(nb.u_L2 == doctest::Approx(tst::l2sq(tst::u_fn(s))).epsilon(1e-10));
    CHECK(nb.u_x_L2 == doctest::Approx(tst::l2sq(tst::phi_t_fn(s))).epsilon(1e-10));
    auto composite = [&](double x) {
        return tst::u_fn(s)(x) - phys.mu * tst::phi_x_fn(s)(x) +
               phys.kappa * tst::cap_phi_fn(s)(x);
    };
    CHECK(nb.composite_L2 == doctest::Approx(tst::l2sq(composite)).epsilon(1e-10));
}

TEST_CASE("Wirtinger chain holds in modal form") {
    Rng rng(7);
    PhysicalParams phys;
    for (int trial = 0; trial < 50; ++trial) {
        const ModalState s = random_state(rng, 1 + trial % 8);
        const NormBundle nb = parseval_norms(s, phys);
        const double slack = 1e-12 * (1.0 + nb.phi_xx_L2 + nb.phi_t_L2);
        CHECK(nb.phi_x_L2 >= kPi * kPi * nb.phi_L2 - slack);
        CHECK(nb.phi_xx_L2 >= kPi * kPi * nb.phi_x_L2 - slack);
        CHECK(nb.u_x_L2 >= kPi * kPi * nb.u_L2 - slack);
        CHECK(nb.u_L2 <= nb.phi_t_L2 + slack);
        CHECK(nb.u_x_L2 == doctest::Approx(nb.phi_t_L2).epsilon(1e-14));
    }
}

TEST_CASE("projection of a reconstruction is the identity") {
    Rng rng(3);
    const int m = 6;
    const ModalState s = random_state(rng, m);
    const ModalState back = project_initial(tst::phi_fn(s), tst::phi_t_fn(s), m);
    CHECK((back.a - s.a).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((back.adot - s.adot).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("uniform grid endpoints") {
    const auto g = uniform_grid();
    CHECK(g.size() == 257);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 1.0);
}
